"""Chord ratios through centroids and sections with a prescribed centroid."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .characterize import symmetry_defect
from .cones import (
    DUAL_MARGIN,
    ConeSpec,
    Membership,
    Section,
    _dual_inside,
    _exit_times,
    boundary_margin,
    contains,
    dual_normals,
    section_centroid,
    ray_exit,
    section_of,
)
from .errors import ConeLabError, NotInteriorError, SearchBudgetExhausted
from .gamma import gamma_curve
from .linalg import Hyperplane, as_vector, orthonormal_complement, sphere_directions

__all__ = [
    "ChordRatio",
    "HammerReport",
    "CentroidSearchResult",
    "hammer_check",
    "find_centroid_section",
    "section_boundary_equality",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChordRatio:
    """Chord ``[x, y]`` through a point ``p = (1 − mu) x + mu y``."""

    x: np.ndarray
    y: np.ndarray
    mu: float

    @property
    def point(self) -> np.ndarray:
        return (1.0 - self.mu) * self.x + self.mu * self.y

    def reversed(self) -> "ChordRatio":
        return ChordRatio(self.y, self.x, 1.0 - self.mu)


@dataclass(frozen=True, eq=False)
class HammerReport:
    min_mu: float
    max_mu: float
    violations: int
    dim: int
    chords: tuple = field(repr=False)

    @property
    def bounds(self) -> tuple[float, float]:
        return 1.0 / (self.dim + 1), self.dim / (self.dim + 1)

    def __iter__(self):
        return iter((self.min_mu, self.max_mu, self.violations))

    def to_dict(self) -> dict:
        lo, hi = self.bounds
        return {
            "min_mu": self.min_mu,
            "max_mu": self.max_mu,
            "violations": self.violations,
            "dim": self.dim,
            "lower_bound": lo,
            "upper_bound": hi,
            "chords": len(self.chords),
        }


def hammer_check(section: Section, num_chords: int = 256, seed: int | None = None, tol: float = 1e-6) -> HammerReport:
    """Division ratios of chords through the centroid of ``section``.

    A chord along ``u`` has ``mu = ρ(−u) / (ρ(u) + ρ(−u))``.  For an
    ``n``-dimensional section every ratio should lie in
    ``[1/(n+1), n/(n+1)]``; ratios outside the band widened by ``tol`` are
    counted as violations.  Directions are a deterministic low-discrepancy
    set; with ``seed`` half of them are replaced by seeded random ones.
    """
    n = section.dim
    if seed is None:
        U = sphere_directions(n, num_chords)
    else:
        half = max(num_chords // 2, 1)
        rnd = np.random.default_rng(seed).standard_normal((num_chords - half, n))
        rnd /= np.linalg.norm(rnd, axis=1, keepdims=True)
        U = np.vstack([sphere_directions(n, half), rnd]) if n > 1 else sphere_directions(1, 2)
    c = section.centroid
    plus = section.radial(c, U)
    minus = section.radial(c, -U)
    mu = minus / (plus + minus)
    W = U @ section.basis.T
    chords = tuple(
        ChordRatio(c - minus[i] * W[i], c + plus[i] * W[i], float(mu[i])) for i in range(len(U))
    )
    lo, hi = 1.0 / (n + 1), n / (n + 1)
    violations = int(np.sum((mu < lo - tol) | (mu > hi + tol)))
    return HammerReport(float(mu.min()), float(mu.max()), violations, n, chords)


@dataclass(frozen=True, eq=False)
class CentroidSearchResult:
    section: Section
    residual: float
    touches_cap: bool
    runs: int
    trace: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "point": self.section.centroid.tolist(),
            "hyperplane": self.section.hyperplane.to_dict(),
            "residual": self.residual,
            "touches_cap": self.touches_cap,
            "runs": self.runs,
        }


def _touches_cap(cone, section, p):
    # With lam = dim C + 1, a section with centroid p lies inside lam*p - C.
    lam = cone.ambient_dim + 1
    return bool(np.min(boundary_margin(cone, lam * p - section.boundary_samples)) < -1e-9)


def _rounded_chart(cone, p, iters=4, count=64):
    """Rounding map ``T`` and affine chart ``u(z) = centre + G z`` for section normals.

    Writes points as ``x = α c + B L s`` where ``B`` spans the witness plane
    through ``p`` and ``c``, ``L`` are refined so that this section is
    roughly isotropic about ``c`` in ``s``.  Normals are parametrised by
    ``u' = (1, z)`` in those coordinates, i.e. the slice ``u · c = 1`` of
    normal space, which meets every ray of the dual cone because ``c`` is
    interior.  ``T`` maps ``x`` to its coordinates ``(α, s)``; ``c`` is the
    pole of the chart.
    """
    n = cone.ambient_dim
    B = orthonormal_complement(cone.witness)
    L = np.eye(n - 1)
    c = p.copy()
    dirs = sphere_directions(n - 1, count)
    for _ in range(iters):
        D = dirs @ L.T
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        Y = ray_exit(cone, c, D @ B.T)[:, None] * D
        m = Y.mean(axis=0)
        c = c + B @ m
        Y = Y - m
        L = np.linalg.cholesky(Y.T @ Y / len(Y))
    inv = np.linalg.inv(np.column_stack([c, B @ L]))
    return inv, c, inv[0], inv[1:].T


def find_centroid_section(
    cone: ConeSpec,
    p,
    tol: float = 1e-6,
    num_samples: int = 64,
    seed: int = 0,
    restarts: int = 8,
    max_iter: int = 200,
    record_trace: bool = False,
) -> CentroidSearchResult:
    """Bounded section of ``cone`` through ``p`` whose centroid is ``p``.

    The reported residual is ``|centroid(S(u)) − p| / |p|``, where ``S(u)``
    is the section through ``p`` with unit normal ``u`` in the dual
    interior.  The search works in a rounded frame in which the section
    through ``p`` is roughly isotropic: normals are parametrised by an
    affine chart of a slice of normal space that meets the whole dual cone,
    and the objective is the same residual measured in rounded
    coordinates (same zeros, much better conditioned on skewed cones).  Each run is a
    Nelder-Mead descent whose initial simplex is scaled to the width of the
    dual cone in the chart.  The first run starts at the witness normal;
    later runs polish the best normal so far when it is already close, and
    otherwise start from seeded dual-interior normals.

    Raises
    ------
    NotInteriorError
        ``p`` is not an interior point.
    SearchBudgetExhausted
        No run reached ``tol`` within ``restarts`` runs.
    """
    p = as_vector(p, cone.ambient_dim)
    if contains(cone, p) is not Membership.INTERIOR:
        raise NotInteriorError("p must be an interior point of the cone")
    pnorm = np.linalg.norm(p)
    starts = dual_normals(cone, restarts, seed)
    T, pole, centre, G = _rounded_chart(cone, p)
    tp = np.linalg.norm(T @ p)
    dim = G.shape[1]
    trace = []

    def chart(z):
        u = centre + G @ z
        return u / np.linalg.norm(u)

    def residual(u):
        if not _dual_inside(cone, u, DUAL_MARGIN)[0]:
            return np.inf
        c = section_centroid(cone, u, u @ p, p)
        return float(np.linalg.norm(c - p) / pnorm)

    def objective(z):
        # residual in rounded coordinates: same zeros, better conditioned
        u = chart(z)
        if not _dual_inside(cone, u, DUAL_MARGIN)[0]:
            return 1e3
        return float(np.linalg.norm(T @ (section_centroid(cone, u, u @ p, p) - p)) / tp)

    def widths(z0):
        # distance to the dual boundary along each chart axis, both ways
        dirs = np.vstack([G.T, -G.T])
        t = _exit_times(lambda U: _dual_inside(cone, U), centre + G @ z0, dirs)
        return np.minimum(t[:dim], t[dim:])

    best_u = starts[0]
    best_f = residual(best_u)
    runs = 0
    goal = 1e-2 * tol
    for k in range(restarts):
        if best_f <= goal:
            break
        if k == 0 or best_f <= 1e-2:
            u0, frac = best_u, 0.2 if k == 0 else min(0.2, max(1e-6, 10.0 * best_f))
        else:
            u0, frac = starts[k], 0.2
        z0 = np.linalg.lstsq(G, u0 / (u0 @ pole) - centre, rcond=None)[0]
        simplex = np.vstack([z0, z0 + np.diag(frac * widths(z0))])
        callback = None
        if record_trace:
            def callback(zk, k=k):
                trace.append({"run": k, "u": chart(zk).tolist(), "f": objective(zk)})
        res = minimize(
            objective,
            z0,
            method="Nelder-Mead",
            callback=callback,
            options={
                "initial_simplex": simplex,
                "xatol": 1e-14,
                "fatol": 1e-16,
                "maxiter": max_iter,
                "adaptive": dim > 2,
            },
        )
        runs += 1
        f = residual(chart(res.x))
        if f < best_f:
            best_f, best_u = f, chart(res.x)
    if best_f > tol:
        raise SearchBudgetExhausted(
            f"no section with centroid residual <= {tol:g} after {runs} runs (best {best_f:.3g})",
            best_f,
        )
    section = section_of(cone, Hyperplane(best_u, float(best_u @ p)), num_samples, margin=0.0, seed=seed)
    cap = _touches_cap(cone, section, p)
    if cap:
        log.warning("centroid section touches the cap region; sampling may be too coarse")
    return CentroidSearchResult(section, best_f, cap, runs, trace)


def section_boundary_equality(cone: ConeSpec, section: Section, tol: float = 1e-6, num_samples: int = 64) -> float:
    """Two-sided check that ``∂S`` equals ``∂C ∩ ∂(2p − C)`` for a symmetric section.

    ``p`` is the centroid of ``section``.  Returns the larger of the
    relative distance of ``Γ(2p)`` samples from the section hyperplane and
    the boundary defect of the section samples for ``2p − C``.  Sections
    with symmetry defect above ``tol`` are rejected.
    """
    if section.cone is not cone:
        raise ConeLabError("section belongs to a different cone")
    asym = symmetry_defect(section)
    if asym > tol:
        raise ConeLabError(f"section is not centrally symmetric (defect {asym:.3g})")
    p = section.centroid
    curve = gamma_curve(cone, 2.0 * p, num_samples)
    off_plane = np.abs(section.hyperplane.signed_distance(curve.points)).max() / np.linalg.norm(p)
    reflected = np.abs(boundary_margin(cone, 2.0 * p - section.boundary_samples)).max()
    return float(max(off_plane, reflected))
