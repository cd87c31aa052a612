"""Flatness and symmetry defects, quadric fitting, inscribed parallelograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial.distance import pdist, squareform

from .cones import (
    ConeSpec,
    Membership,
    Section,
    boundary_margin,
    contains,
    dual_normals,
    ray_exit,
    section_of,
)
from .errors import ConeLabError, NotInteriorError
from .gamma import gamma_curve
from .linalg import (
    Hyperplane,
    affine_rank,
    as_points,
    as_vector,
    diameter,
    fit_hyperplane,
    orthonormal_complement,
    sphere_directions,
    symmetric_eigen,
)

__all__ = [
    "FBIReport",
    "EllipsoidFit",
    "CSSReport",
    "fbi_defect",
    "analytic_fbi_hyperplane",
    "symmetry_defect",
    "css_sweep",
    "fit_ellipsoid",
    "cone_ellipsoid_fit",
    "ellipsoid_section_scan",
    "inscribed_parallelogram",
]

FIT_THRESHOLD = 1e-6
DEFINITE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FBIReport:
    a: np.ndarray
    affine_dim: int
    flatness_defect: float
    spectrum: np.ndarray
    hyperplane: Hyperplane
    num_samples: int
    rel_tol: float

    def to_dict(self) -> dict:
        return {
            "a": self.a.tolist(),
            "affine_dim": self.affine_dim,
            "flatness_defect": self.flatness_defect,
            "spectrum": self.spectrum.tolist(),
            "hyperplane": self.hyperplane.to_dict(),
            "num_samples": self.num_samples,
            "rel_tol": self.rel_tol,
        }


@dataclass(frozen=True, eq=False)
class EllipsoidFit:
    quad_coeffs: np.ndarray
    lin_coeffs: np.ndarray
    const_coeff: float
    residual: float
    is_ellipsoid: bool

    @property
    def coefficient_vector(self) -> np.ndarray:
        """``(A_11, A_12, ..., A_dd, b_1, ..., b_d, c)`` with upper-triangle ``A`` entries."""
        iu = np.triu_indices(self.quad_coeffs.shape[0])
        return np.concatenate([self.quad_coeffs[iu], self.lin_coeffs, [self.const_coeff]])

    def to_dict(self) -> dict:
        return {
            "quad_coeffs": self.quad_coeffs.tolist(),
            "lin_coeffs": self.lin_coeffs.tolist(),
            "const_coeff": self.const_coeff,
            "residual": self.residual,
            "is_ellipsoid": self.is_ellipsoid,
        }


@dataclass(frozen=True, eq=False)
class CSSReport:
    sections_tested: int
    max_symmetry_defect: float
    worst_hyperplane: Hyperplane
    defects: np.ndarray = field(repr=False)
    seed: int = 0
    num_directions: int = 64

    def to_dict(self) -> dict:
        return {
            "sections_tested": self.sections_tested,
            "max_symmetry_defect": self.max_symmetry_defect,
            "worst_hyperplane": self.worst_hyperplane.to_dict(),
            "defects": self.defects.tolist(),
            "seed": self.seed,
            "num_directions": self.num_directions,
        }


# --------------------------------------------------------------------------
# FBI


def fbi_defect(cone: ConeSpec, a, num_samples: int = 64, rel_tol: float = 1e-8) -> FBIReport:
    """How far ``∂C ∩ ∂(a − C)`` is from lying in a hyperplane.

    The flatness defect is the largest distance of a gamma sample from the
    least-squares hyperplane, divided by the diameter of the samples.
    """
    a = as_vector(a, cone.ambient_dim)
    curve = gamma_curve(cone, a, num_samples)
    pts = curve.points
    dim, spectrum = affine_rank(pts, rel_tol)
    plane, max_dist = fit_hyperplane(pts, rel_tol)
    return FBIReport(a, dim, max_dist / diameter(pts), spectrum, plane, num_samples, rel_tol)


def analytic_fbi_hyperplane(cone: ConeSpec, a) -> Hyperplane:
    """Hyperplane ``(Qa) . x = a^T Q a / 2`` containing ``Γ`` for a quadratic cone.

    Any ``g`` with ``g^T Q g = 0`` and ``(a − g)^T Q (a − g) = 0`` satisfies
    it, which is the coordinate-free form of the normal-form relation.
    """
    if not cone.is_quadratic:
        raise ConeLabError("analytic FBI hyperplane needs a quadratic cone")
    a = as_vector(a, cone.ambient_dim)
    if contains(cone, a) is not Membership.INTERIOR:
        raise NotInteriorError("a must be an interior point of the cone")
    qa = cone.q_unit @ a
    return Hyperplane.from_normal(qa, 0.5 * (a @ qa))


# --------------------------------------------------------------------------
# CSS


def symmetry_defect(section: Section, num_directions: int = 64, seed: int = 0) -> float:
    """Central-asymmetry of a section about its centroid, in ``[0, 1]``.

    ``max |ρ(u) − ρ(−u)| / (ρ(u) + ρ(−u))`` over unit directions ``u`` in the
    plane, where ``ρ`` is the boundary distance from the centroid.  The
    directions are a deterministic spread plus the directions towards
    every boundary sample (so polygon vertices are always probed).
    """
    c = section.centroid
    if contains(section.cone, c) is not Membership.INTERIOR:
        raise ConeLabError("centroid is not inside the section")
    spread = sphere_directions(section.dim, num_directions, seed)
    towards = section.coords(section.boundary_samples) - section.coords(c)
    lengths = np.linalg.norm(towards, axis=1)
    towards = towards[lengths > 0] / lengths[lengths > 0, None]
    U = np.vstack([spread, towards])
    plus = section.radial(c, U)
    minus = section.radial(c, -U)
    return float(np.max(np.abs(plus - minus) / (plus + minus)))


def css_sweep(
    cone: ConeSpec,
    num_hyperplanes: int = 32,
    seed: int = 0,
    num_directions: int = 64,
    normals=None,
) -> CSSReport:
    """Largest symmetry defect over seeded bounded sections.

    Normals come from :func:`conelab.cones.dual_normals` unless given
    explicitly.  Each section passes through the point at unit depth on
    the cone axis (the offset is irrelevant up to homothety).
    """
    if normals is None:
        normals = dual_normals(cone, num_hyperplanes, seed)
    normals = as_points(normals)
    defects = []
    planes = []
    for u in normals:
        plane = Hyperplane.from_normal(u, u @ cone.axis)
        sec = section_of(cone, plane, num_directions, seed=seed)
        defects.append(symmetry_defect(sec, num_directions, seed))
        planes.append(plane)
    defects = np.array(defects)
    worst = int(np.argmax(defects))
    return CSSReport(len(planes), float(defects[worst]), planes[worst], defects, seed, num_directions)


# --------------------------------------------------------------------------
# quadric fitting


def _design(Y):
    m, d = Y.shape
    iu, ju = np.triu_indices(d)
    weight = np.where(iu == ju, 1.0, math.sqrt(2.0))
    quad = Y[:, iu] * Y[:, ju] * weight
    return np.hstack([quad, Y, np.ones((m, 1))]), iu, ju


def fit_ellipsoid(points, threshold: float = FIT_THRESHOLD) -> EllipsoidFit:
    """Algebraic least-squares quadric ``x^T A x + b . x + c = 0`` through points.

    Points are in flat (section-plane) coordinates.  The fit runs on the
    cloud centred at its mean and scaled to unit RMS radius, with the
    off-diagonal monomials weighted by ``sqrt(2)`` so the unit-norm
    constraint on ``(A, b, c)`` is the Frobenius norm; the residual is
    therefore invariant under rigid motions and scaling of the input.

    The returned coefficients are mapped back to the input coordinates and
    renormalised to unit norm, with the sign chosen so ``trace(A) >= 0``.
    ``is_ellipsoid`` requires a positive-definite ``A`` (relative threshold
    ``1e-8``), a non-empty real solution set and ``residual <= threshold``.
    """
    P = as_points(points)
    m, d = P.shape
    need = (d + 1) * (d + 2) // 2
    if m < need:
        raise ConeLabError(f"need at least {need} points to fit a quadric in {d} dimensions, got {m}")
    mean = P.mean(axis=0)
    scale = math.sqrt(np.mean(np.sum((P - mean) ** 2, axis=1)))
    if scale == 0.0:
        raise ConeLabError("all points coincide; design matrix is degenerate")
    Y = (P - mean) / scale
    D, iu, ju = _design(Y)
    theta = symmetric_eigen(D.T @ D).eigenvectors[:, -1]
    theta /= np.linalg.norm(theta)
    residual = float(np.abs(D @ theta).max())

    nq = len(iu)
    A = np.zeros((d, d))
    A[iu, ju] = theta[:nq] / np.where(iu == ju, 1.0, math.sqrt(2.0))
    A[ju, iu] = A[iu, ju]
    b = theta[nq : nq + d]
    c = theta[-1]
    if np.trace(A) < 0:
        A, b, c = -A, -b, -c

    w = symmetric_eigen(A).eigenvalues
    definite = w[-1] > DEFINITE_TOL * np.abs(w).max()
    nonempty = False
    if definite:
        center = -0.5 * np.linalg.solve(A, b)
        nonempty = center @ A @ center + b @ center + c < 0

    A_out = A / scale**2
    b_out = -2.0 * A @ mean / scale**2 + b / scale
    c_out = mean @ A @ mean / scale**2 - b @ mean / scale + c
    norm = math.sqrt(np.sum(A_out**2) + b_out @ b_out + c_out**2)
    return EllipsoidFit(
        A_out / norm,
        b_out / norm,
        float(c_out / norm),
        residual,
        bool(definite and nonempty and residual <= threshold),
    )


def cone_ellipsoid_fit(cone: ConeSpec, num_samples: int = 64, threshold: float = FIT_THRESHOLD) -> EllipsoidFit:
    """Quadric fit of the boundary of the witness-normal section of ``cone``.

    For a two-dimensional cone the section is a segment, which is a
    one-dimensional ellipsoid; the fit is then exact by construction.
    """
    plane = Hyperplane(cone.witness, float(cone.witness @ cone.axis))
    d = cone.ambient_dim - 1
    count = max(num_samples, 3 * (d + 1) * (d + 2) // 2)
    sec = section_of(cone, plane, count)
    Y = sec.coords(sec.boundary_samples)
    if d == 1:
        lo, hi = Y.min(), Y.max()
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        coeffs = np.array([1.0, -2.0 * mid, mid * mid - half * half])
        coeffs /= np.linalg.norm(coeffs)
        return EllipsoidFit(coeffs[:1].reshape(1, 1), coeffs[1:2], float(coeffs[2]), 0.0, True)
    return fit_ellipsoid(Y, threshold)


def ellipsoid_section_scan(section: Section, num_subsections: int = 16, seed: int = 0, samples: int = 96) -> float:
    """Worst quadric-fit residual over slices of a section.

    Sections of dimension ``>= 3`` are cut by ``num_subsections`` seeded
    hyperplanes inside the section plane and every slice boundary is
    fitted.  Two-dimensional sections return the direct fit residual and
    one-dimensional ones return 0.
    """
    d = section.dim
    if d == 1:
        return 0.0
    if d == 2:
        return fit_ellipsoid(section.coords(section.boundary_samples)).residual
    rng = np.random.default_rng(seed)
    c = section.coords(section.centroid)
    need = d * (d + 1) // 2
    count = max(samples, 4 * need)
    worst = 0.0
    for _ in range(num_subsections):
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        fwd, back = section.radial(section.lift(c), np.array([v, -v]))
        s = rng.uniform(-0.5, 0.5)
        q = c + s * (fwd if s > 0 else back) * v
        slice_dirs = sphere_directions(d - 1, count, seed)
        t = section.radial(section.lift(q), slice_dirs @ orthonormal_complement(v).T)
        worst = max(worst, fit_ellipsoid(t[:, None] * slice_dirs).residual)
    return worst


# --------------------------------------------------------------------------
# inscribed parallelogram


def inscribed_parallelogram(section: Section, tol: float = 1e-9) -> np.ndarray:
    """Four boundary points of a 2-d section forming a parallelogram.

    Chords perpendicular to a fixed diameter (through the centroid, along
    the direction of the farthest pair of boundary samples) have a concave
    length profile.  Two chords of equal length on either side of the
    longest one are found by bisection and their convex hull returned as
    vertices in cyclic order.  Raises if the result is not on the boundary
    within ``tol`` or its diagonals do not bisect each other within ``tol``.
    """
    if section.dim != 2:
        raise ConeLabError("inscribed parallelogram needs a 2-dimensional section")
    Y = section.coords(section.boundary_samples)
    dist = squareform(pdist(Y))
    i, j = np.unravel_index(np.argmax(dist), dist.shape)
    e = (Y[j] - Y[i]) / dist[i, j]
    f = np.array([-e[1], e[0]])
    c = section.coords(section.centroid)
    t_plus, t_minus = section.radial(section.centroid, np.array([e, -e]))

    def ends(t):
        p = section.lift(c + t * e)
        up, down = section.radial(p, np.array([f, -f]))
        return c + t * e + up * f, c + t * e - down * f

    def length(t):
        up, down = ends(t)
        return np.linalg.norm(up - down)

    lo_end = -t_minus * (1 - 1e-6)
    hi_end = t_plus * (1 - 1e-6)
    size = t_plus + t_minus
    opt = minimize_scalar(lambda t: -length(t), bounds=(lo_end, hi_end), method="bounded", options={"xatol": 1e-12 * size})
    t_star = float(opt.x)
    l_max = length(t_star)
    if l_max <= 1e-9 * size:
        raise ConeLabError("degenerate section")
    target = 0.5 * (l_max + max(length(lo_end), length(hi_end)))

    def extreme(a, b):
        # bisection on the boundary of the interval {length >= target}; b is inside it
        if length(a) >= target:
            return a
        for _ in range(100):
            mid = 0.5 * (a + b)
            if length(mid) >= target:
                b = mid
            else:
                a = mid
        return b

    t1 = extreme(lo_end, t_star)
    t2 = extreme(hi_end, t_star)
    a1, b1 = ends(t1)
    a2, b2 = ends(t2)
    verts = section.lift(np.array([a1, a2, b2, b1]))
    scale = max(1.0, size)
    on_boundary = np.abs(boundary_margin(section.cone, verts)).max()
    mid_gap = np.linalg.norm(0.5 * (verts[0] + verts[2]) - 0.5 * (verts[1] + verts[3]))
    if on_boundary > tol or mid_gap > tol * scale:
        raise ConeLabError(f"parallelogram verification failed (boundary {on_boundary:.3g}, diagonals {mid_gap:.3g})")
    return verts
