"""The boundary-intersection set ``∂C ∩ ∂(a − C)`` built from section chords.

Pick a bounded section ``S`` and ``λ > 0`` with ``λa`` inside ``S``.  For a
boundary point ``x`` of ``S`` let ``r(x)`` be the far end of the chord of
``S`` from ``x`` through ``λa``.  Writing ``λa = λμx + (1 − λμ)r(x)`` gives a
scale ``μ`` in ``(0, 1/λ)``, and ``μx`` is the unique multiple of ``x`` on
the boundary of ``a − C``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .cones import (
    ConeSpec,
    Membership,
    Section,
    boundary_margin,
    contains,
    ray_exit,
    section_of,
)
from .errors import ConeLabError, NotInteriorError
from .linalg import Hyperplane, as_vector

__all__ = [
    "GammaSample",
    "GammaCurve",
    "chord_opposite_endpoint",
    "gamma_scale",
    "gamma_curve",
    "gamma_central_symmetry_check",
]

log = logging.getLogger(__name__)

VERIFY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class GammaSample:
    base_point: np.ndarray
    opposite_point: np.ndarray
    scale: float
    gamma_point: np.ndarray
    lam: float


@dataclass(frozen=True, eq=False)
class GammaCurve:
    a: np.ndarray
    samples: tuple
    section_used: Section
    lam: float

    @property
    def points(self) -> np.ndarray:
        return np.array([s.gamma_point for s in self.samples])

    @property
    def scales(self) -> np.ndarray:
        return np.array([s.scale for s in self.samples])

    def to_dict(self) -> dict:
        return {
            "a": self.a.tolist(),
            "lambda": self.lam,
            "samples": [
                {
                    "x": s.base_point.tolist(),
                    "r": s.opposite_point.tolist(),
                    "mu": s.scale,
                    "g": s.gamma_point.tolist(),
                }
                for s in self.samples
            ],
        }


def _check_in_section(section, x, name):
    if abs(section.hyperplane.signed_distance(x)) > 1e-9 * max(1.0, np.linalg.norm(x)):
        raise ConeLabError(f"{name} is not in the section hyperplane")


def chord_opposite_endpoint(section: Section, x, through, tol: float = 1e-9) -> np.ndarray:
    """Far endpoint of the chord of ``section`` that starts at ``x`` and passes ``through``."""
    cone = section.cone
    x = as_vector(x, cone.ambient_dim)
    through = as_vector(through, cone.ambient_dim)
    _check_in_section(section, x, "x")
    _check_in_section(section, through, "through point")
    if contains(cone, x, tol) is not Membership.BOUNDARY:
        raise ConeLabError("x is not on the section boundary")
    if contains(cone, through, tol) is not Membership.INTERIOR:
        raise ConeLabError("chord point is not in the relative interior of the section")
    d = through - x
    d /= np.linalg.norm(d)
    t = ray_exit(cone, through, d[None, :])[0]
    return through + t * d


def gamma_scale(x, r, a, lam: float) -> float:
    """Scale ``μ`` with ``λa = λμx + (1 − λμ)r``; requires ``0 < μ < 1/λ``."""
    x, r, a = (as_vector(v) for v in (x, r, a))
    if lam <= 0:
        raise ConeLabError("lambda must be positive")
    span = np.linalg.norm(x - r)
    if span == 0.0:
        raise ConeLabError("chord endpoints coincide")
    la = lam * a
    mu = np.linalg.norm(la - r) / (lam * span)
    resid = np.linalg.norm(la - (lam * mu * x + (1.0 - lam * mu) * r))
    if resid > 1e-10 * max(np.linalg.norm(la), span):
        raise ConeLabError(f"lambda*a is off the chord (residual {resid:.3g})")
    if not 0.0 < mu < 1.0 / lam:
        raise ConeLabError(f"scale {mu} outside (0, 1/lambda)")
    return float(mu)


def canonical_section(cone: ConeSpec, a, num_samples: int = 64, seed: int = 0) -> Section:
    """Section by the witness normal through ``a`` (so ``λ = 1``)."""
    return section_of(cone, Hyperplane(cone.witness, float(cone.witness @ a)), num_samples, seed=seed)


def gamma_curve(
    cone: ConeSpec,
    a,
    num_samples: int = 64,
    section: Section | None = None,
    verify_tol: float = VERIFY_TOL,
) -> GammaCurve:
    """Sample ``Γ = ∂C ∩ ∂(a − C)`` through the chord construction.

    Parameters
    ----------
    cone : ConeSpec
    a : array_like
        Interior point of ``cone``.
    num_samples : int
        Number of section boundary directions (polyhedral sections add
        their vertices).
    section : Section, optional
        Bounded section to build chords in; must be met by the ray through
        ``a``.  Defaults to the witness-normal section through ``a``.
    verify_tol : float
        Every gamma point must have ``|margin| <= verify_tol`` for both
        ``C`` and ``a − C``; violations raise.
    """
    a = as_vector(a, cone.ambient_dim)
    if contains(cone, a) is not Membership.INTERIOR:
        raise NotInteriorError("a must be an interior point of the cone")
    if section is None:
        section = canonical_section(cone, a, num_samples)
    elif section.cone is not cone:
        raise ConeLabError("section belongs to a different cone")
    plane = section.hyperplane
    denom = plane.normal @ a
    if denom <= 0.0:
        raise ConeLabError("the ray through a misses the section")
    lam = plane.offset / denom
    through = lam * a
    X = np.asarray(section.boundary_samples)
    D = through - X
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    R = through + ray_exit(cone, through, D)[:, None] * D
    mu = np.linalg.norm(through - R, axis=1) / (lam * np.linalg.norm(X - R, axis=1))
    G = mu[:, None] * X
    defect = np.maximum(np.abs(boundary_margin(cone, G)), np.abs(boundary_margin(cone, a - G)))
    if defect.max() > verify_tol or np.any(mu <= 0.0) or np.any(mu >= 1.0 / lam):
        raise ConeLabError(f"gamma construction failed verification (defect {defect.max():.3g})")
    samples = tuple(
        GammaSample(X[i].copy(), R[i], float(mu[i]), G[i], float(lam)) for i in range(len(X))
    )
    return GammaCurve(a, samples, section, float(lam))


def gamma_central_symmetry_check(cone: ConeSpec, curve: GammaCurve, tol: float = VERIFY_TOL) -> float:
    """Largest boundary defect of the reflected samples ``a − g``.

    For each gamma point ``g`` the reflection ``a − g`` must lie on ``∂C``
    and on ``∂(a − C)``; the latter is the statement ``g ∈ ∂C``.  Membership
    is re-tested directly rather than matched against other samples.
    """
    if curve.section_used.cone is not cone:
        raise ConeLabError("curve was built for a different cone")
    G = curve.points
    refl = curve.a - G
    worst = float(max(np.abs(boundary_margin(cone, refl)).max(), np.abs(boundary_margin(cone, curve.a - refl)).max()))
    if worst > tol:
        log.warning("central symmetry violation %.3g exceeds %.3g", worst, tol)
    return worst
