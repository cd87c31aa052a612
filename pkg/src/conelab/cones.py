"""Closed pointed convex cones behind one membership/boundary oracle.

Three concrete representations are supported:

``quadratic``
    ``{x : x^T Q x >= 0, t^T Q x >= 0}`` for ``Q`` of signature ``(1, n)``
    and a time axis ``t`` with ``t^T Q t > 0``.
``polyhedral``
    The conic hull of a finite list of rays.
``basebody``
    The cone over the convex hull of vertices lying in an affine
    hyperplane that misses the origin.  Internally this is the polyhedral
    cone generated by the vertices, so membership works in any dimension.

Every cone carries a unit *witness* ``u`` strictly inside the dual cone
(``u . x > 0`` on the cone minus the apex) and a unit *axis* direction deep
in its interior.  Bounded sections, interior sampling and dual sampling
are all organised around these two vectors.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import ConeLabError, InvalidConeError, NotInteriorError, UnboundedSectionError
from .linalg import (
    Hyperplane,
    affine_rank,
    as_points,
    as_vector,
    orthonormal_complement,
    sphere_directions,
    symmetric_eigen,
)

__all__ = [
    "Membership",
    "ConeSpec",
    "Section",
    "contains",
    "boundary_margin",
    "dual_interior_contains",
    "ray_exit",
    "section_of",
    "centroid_of_section",
    "polytope_centroid",
    "section_centroid",
    "interior_points",
    "dual_normals",
    "cone_from_dict",
    "cone_to_dict",
    "load_cone",
    "save_cone",
]

BISECTION_ITERS = 60
BOUNDARY_TOL = 1e-9
DUAL_MARGIN = 1e-6
_MAX_BRACKET_STEPS = 200


class Membership(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """A closed pointed full-dimensional convex cone.

    Use :meth:`quadratic`, :meth:`polyhedral` or :meth:`basebody` to build
    one; the constructors validate the data and precompute the oracle
    state.  ``Q``/``rays``/``base_*`` keep the data exactly as supplied.
    """

    variant: str
    ambient_dim: int
    Q: np.ndarray | None = None
    time_axis: np.ndarray | None = None
    rays: np.ndarray | None = None
    base_plane: Hyperplane | None = None
    base_vertices: np.ndarray | None = None
    witness: np.ndarray = field(default=None, repr=False)
    axis: np.ndarray = field(default=None, repr=False)
    # quadratic: Q scaled to unit spectral norm, and the matching dual form
    q_unit: np.ndarray | None = field(default=None, repr=False)
    q_dual: np.ndarray | None = field(default=None, repr=False)
    # polyhedral/basebody: unit inner facet normals and unit extreme rays
    facets: np.ndarray | None = field(default=None, repr=False)
    extreme_rays: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_quadratic(self) -> bool:
        return self.variant == "quadratic"

    @classmethod
    def quadratic(cls, Q, time_axis) -> "ConeSpec":
        q = np.array(Q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise InvalidConeError(f"Q must be square, got shape {q.shape}")
        n = q.shape[0]
        if n < 2:
            raise InvalidConeError("cones of dimension < 2 are not supported")
        t = _vec(time_axis, n)
        try:
            eig = symmetric_eigen(q)
        except ConeLabError as exc:
            raise InvalidConeError(str(exc)) from exc
        w = eig.eigenvalues
        scale = np.abs(w).max()
        if scale == 0.0:
            raise InvalidConeError("Q is zero")
        pos = int(np.sum(w > 1e-10 * scale))
        neg = int(np.sum(w < -1e-10 * scale))
        if pos != 1 or neg != n - 1:
            raise InvalidConeError(f"Q must have signature (1, {n - 1}), got ({pos}, {neg})")
        q_unit = 0.5 * (q + q.T) / scale
        if t @ q_unit @ t <= 0.0:
            raise InvalidConeError("time axis must satisfy t^T Q t > 0")
        q_dual = np.linalg.inv(q_unit)
        q_dual = 0.5 * (q_dual + q_dual.T) / (1.0 / np.abs(w / scale).min())
        witness = q_unit @ t
        witness /= np.linalg.norm(witness)
        for arr in (q, t, q_unit, q_dual, witness):
            arr.setflags(write=False)
        axis = t / np.linalg.norm(t)
        axis.setflags(write=False)
        return cls(
            "quadratic", n, Q=q, time_axis=t, witness=witness, axis=axis, q_unit=q_unit, q_dual=q_dual
        )

    @classmethod
    def polyhedral(cls, rays) -> "ConeSpec":
        r = _points(rays)
        return cls._from_generators("polyhedral", r)

    @classmethod
    def basebody(cls, base_normal, base_offset, base_vertices) -> "ConeSpec":
        verts = _points(base_vertices)
        n = verts.shape[1]
        try:
            plane = Hyperplane.from_normal(_vec(base_normal, n), base_offset)
        except ConeLabError as exc:
            raise InvalidConeError(str(exc)) from exc
        if abs(plane.offset) <= 1e-12:
            raise InvalidConeError("base hyperplane passes through the origin")
        scale = max(np.abs(verts).max(), abs(plane.offset))
        if np.abs(plane.signed_distance(verts)).max() > 1e-9 * scale:
            raise InvalidConeError("base vertices do not lie in the base hyperplane")
        rank, _ = affine_rank(verts)
        if rank != n - 1:
            raise InvalidConeError(f"base vertices span an affine flat of dimension {rank}, need {n - 1}")
        return cls._from_generators("basebody", verts, base_plane=plane)

    @classmethod
    def _from_generators(cls, variant, gens, base_plane=None):
        m, n = gens.shape
        if n < 2:
            raise InvalidConeError("cones of dimension < 2 are not supported")
        if m < n:
            raise InvalidConeError(f"need at least {n} generators in R^{n}, got {m}")
        norms = np.linalg.norm(gens, axis=1)
        if np.any(norms == 0.0):
            raise InvalidConeError("zero ray")
        unit = gens / norms[:, None]
        facets, extreme = _facets_of(unit)
        witness = facets.sum(axis=0)
        witness /= np.linalg.norm(witness)
        if np.min(unit @ witness) <= 1e-12:
            raise InvalidConeError("cone is not pointed")
        axis = unit.mean(axis=0)
        axis /= np.linalg.norm(axis)
        if np.min(facets @ axis) <= 1e-12:
            raise InvalidConeError("cone is not full-dimensional")
        for arr in (gens, facets, extreme, witness, axis):
            arr.setflags(write=False)
        kwargs = {"rays": gens} if variant == "polyhedral" else {"base_vertices": gens, "base_plane": base_plane}
        return cls(variant, n, witness=witness, axis=axis, facets=facets, extreme_rays=extreme, **kwargs)

    def to_dict(self) -> dict:
        return cone_to_dict(self)


def _vec(x, dim):
    try:
        return np.array(as_vector(x, dim), dtype=float)
    except ConeLabError as exc:
        raise InvalidConeError(str(exc)) from exc


def _points(x):
    try:
        return np.array(as_points(x), dtype=float)
    except ConeLabError as exc:
        raise InvalidConeError(str(exc)) from exc


def _facets_of(unit_rays):
    """Inner unit facet normals and extreme rays of ``cone(unit_rays)``.

    The cone facets are the facets through the origin of the polytope
    ``conv({0} U rays)``; the origin is a vertex of it iff the cone is pointed.
    """
    n = unit_rays.shape[1]
    pts = np.vstack([np.zeros(n), unit_rays])
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise InvalidConeError("rays do not span a full-dimensional cone") from exc
    if 0 not in hull.vertices:
        raise InvalidConeError("cone is not pointed")
    eq = hull.equations
    through_origin = np.abs(eq[:, -1]) <= 1e-10
    inner = -eq[through_origin, :-1]
    inner /= np.linalg.norm(inner, axis=1, keepdims=True)
    facets = []
    for g in inner:
        if not any(np.linalg.norm(g - f) <= 1e-9 for f in facets):
            facets.append(g)
    facets = np.array(facets)
    # a ray is extreme iff its active facets cut out a line
    extreme = []
    for r in pts[np.sort(hull.vertices[hull.vertices != 0])]:
        active = facets[np.abs(facets @ r) <= 1e-10]
        if len(active) >= n - 1 and np.linalg.matrix_rank(active, tol=1e-9) == n - 1:
            if not any(np.linalg.norm(r - e) <= 1e-9 for e in extreme):
                extreme.append(r)
    return facets, np.array(extreme)


# --------------------------------------------------------------------------
# membership


def boundary_margin(cone: ConeSpec, x) -> np.ndarray:
    """Scale-free signed membership margin; positive inside, negative outside.

    Quadratic cones use ``x^T Q x / |x|^2`` with ``Q`` at unit spectral norm
    (negated off the future sheet); polyhedral cones use the smallest
    facet value ``g . x / |x|``.  The apex has margin 0.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[-1] != cone.ambient_dim:
        raise ConeLabError(f"dimension mismatch: cone is in R^{cone.ambient_dim}, point has {X.shape[-1]}")
    nrm = np.linalg.norm(X, axis=1)
    safe = np.where(nrm == 0.0, 1.0, nrm)
    if cone.is_quadratic:
        q = np.einsum("ij,jk,ik->i", X, cone.q_unit, X) / safe**2
        s = (X @ cone.witness) / safe
        m = np.where(s >= 0.0, q, -(np.abs(q) + np.abs(s)))
    else:
        m = (X @ cone.facets.T).min(axis=1) / safe
    m = np.where(nrm == 0.0, 0.0, m)
    return m if np.ndim(x) > 1 else m[0]


def _inside(cone, X):
    if cone.is_quadratic:
        q = np.einsum("ij,jk,ik->i", X, cone.q_unit, X)
        return (q >= 0.0) & (X @ cone.witness >= 0.0)
    return (X @ cone.facets.T).min(axis=1) >= 0.0


def contains(cone: ConeSpec, x, tol: float = BOUNDARY_TOL) -> Membership:
    """Classify ``x`` as interior, boundary (``|margin| <= tol``) or outside."""
    v = as_vector(x)
    m = boundary_margin(cone, v)
    if abs(m) <= tol:
        return Membership.BOUNDARY
    return Membership.INTERIOR if m > 0 else Membership.OUTSIDE


def _dual_inside(cone, U, margin=0.0):
    U = np.atleast_2d(U)
    un = U / np.linalg.norm(U, axis=1, keepdims=True)
    if cone.is_quadratic:
        q = np.einsum("ij,jk,ik->i", un, cone.q_dual, un)
        return (q > margin) & (un @ cone.axis > 0.0)
    return (un @ cone.extreme_rays.T).min(axis=1) > margin


def dual_interior_contains(cone: ConeSpec, u, margin: float = DUAL_MARGIN) -> bool:
    """True iff ``u`` is strictly positive on the cone minus its apex.

    ``margin`` is the strictness margin on the normalised dual test;
    near-tangent normals inside it are rejected.
    """
    v = as_vector(u, cone.ambient_dim)
    if not np.any(v):
        raise ConeLabError("zero vector")
    return bool(_dual_inside(cone, v, margin)[0])


def _exit_times(pred, origins, dirs, iters=BISECTION_ITERS):
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    origins = np.broadcast_to(np.asarray(origins, dtype=float), dirs.shape)
    m = dirs.shape[0]
    scale = np.linalg.norm(origins, axis=1) / np.linalg.norm(dirs, axis=1)
    scale = np.where(scale > 0.0, scale, 1.0)
    lo = np.zeros(m)
    hi = scale.copy()
    for _ in range(_MAX_BRACKET_STEPS):
        ins = pred(origins + hi[:, None] * dirs)
        if not ins.any():
            break
        lo[ins] = hi[ins]
        hi[ins] *= 2.0
    else:
        raise UnboundedSectionError("ray does not leave the cone")
    need = lo == 0.0
    for _ in range(_MAX_BRACKET_STEPS):
        if not need.any():
            break
        idx = np.flatnonzero(need)
        h = 0.5 * hi[idx]
        ins = pred(origins[idx] + h[:, None] * dirs[idx])
        lo[idx[ins]] = h[ins]
        hi[idx[~ins]] = h[~ins]
        need[idx[ins]] = False
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ins = pred(origins + mid[:, None] * dirs)
        lo = np.where(ins, mid, lo)
        hi = np.where(ins, hi, mid)
    return lo


def ray_exit(cone: ConeSpec, origin, directions, reflect_about=None) -> np.ndarray:
    """Distance parameters ``t`` at which ``origin + t*d`` leaves the cone.

    Bisection on exact membership: bracket by doubling/halving, then
    :data:`BISECTION_ITERS` halvings.  With ``reflect_about=a`` the set
    ``a - C`` is used instead of ``C``.  ``origin`` must be inside.
    """
    if reflect_about is None:
        pred = lambda X: _inside(cone, X)  # noqa: E731
    else:
        a = np.asarray(reflect_about, dtype=float)
        pred = lambda X: _inside(cone, a - X)  # noqa: E731
    return _exit_times(pred, origin, directions)


# --------------------------------------------------------------------------
# sections


@dataclass(frozen=True, eq=False)
class Section:
    """Bounded hyperplane slice of a cone.

    ``basis`` holds an orthonormal basis of the hyperplane directions as
    columns; plane coordinates are taken relative to ``interior_point``.
    ``centroid`` is computed in closed form (analytic ellipsoid centre for
    quadratic cones, exact polytope centroid for polyhedral ones) and
    ``centroid_error`` is its distance to the fan-triangulated centroid of
    the sampled boundary polytope.
    """

    cone: ConeSpec
    hyperplane: Hyperplane
    basis: np.ndarray
    interior_point: np.ndarray
    boundary_samples: np.ndarray
    centroid: np.ndarray
    centroid_error: float
    num_samples: int
    seed: int = 0

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def coords(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.interior_point) @ self.basis

    def lift(self, y) -> np.ndarray:
        return self.interior_point + np.asarray(y, dtype=float) @ self.basis.T

    def radial(self, center, plane_dirs) -> np.ndarray:
        """Boundary distance from ``center`` along in-plane unit directions."""
        d = np.atleast_2d(plane_dirs) @ self.basis.T
        return ray_exit(self.cone, center, d)


def _plane_directions(d, count, seed):
    return sphere_directions(d, count, seed)


def _polyhedral_vertices(cone, normal, offset):
    r = cone.extreme_rays
    return r * (offset / (r @ normal))[:, None]


def polytope_centroid(points, origin=None) -> np.ndarray:
    """Centroid of ``conv(points)`` by fan triangulation from ``origin``.

    ``origin`` must lie inside the hull (defaults to the vertex mean).
    Works in any dimension ``>= 1``; points are given in flat coordinates.
    """
    Y = as_points(points)
    d = Y.shape[1]
    if d == 1:
        return np.array([0.5 * (Y.min() + Y.max())])
    y0 = Y.mean(axis=0) if origin is None else np.asarray(origin, dtype=float)
    try:
        hull = ConvexHull(Y)
    except QhullError as exc:
        raise ConeLabError(f"fewer than {d + 1} affinely independent samples") from exc
    F = Y[hull.simplices]  # (f, d, d)
    vol = np.abs(np.linalg.det(F - y0[None, None, :]))
    cent = (F.sum(axis=1) + y0) / (d + 1)
    return (vol[:, None] * cent).sum(axis=0) / vol.sum()


def section_centroid(cone: ConeSpec, normal, offset, origin, basis=None) -> np.ndarray:
    """Closed-form centroid of the bounded section ``{normal . x = offset}``.

    ``origin`` is any point of the section's relative interior.  Quadratic
    cones give an ellipsoid whose centre solves a linear system; polyhedral
    cones give the polytope spanned by the extreme-ray hits.
    """
    normal = np.asarray(normal, dtype=float)
    origin = np.asarray(origin, dtype=float)
    B = orthonormal_complement(normal) if basis is None else basis
    if cone.is_quadratic:
        A = B.T @ cone.q_unit @ B
        b = B.T @ cone.q_unit @ origin
        return origin - B @ np.linalg.solve(A, b)
    verts = _polyhedral_vertices(cone, normal, offset)
    y = polytope_centroid((verts - origin) @ B, np.zeros(B.shape[1]))
    return origin + B @ y


def section_of(
    cone: ConeSpec,
    hyperplane: Hyperplane,
    num_samples: int = 64,
    margin: float = DUAL_MARGIN,
    seed: int = 0,
) -> Section:
    """Sample the boundary of the bounded section ``cone ∩ hyperplane``.

    Boundary points come from bisection along ``num_samples`` deterministic
    in-plane directions issued from the point where the cone axis meets the
    plane.  For polyhedral cones the section vertices (extreme-ray hits)
    are appended so the sampled polytope equals the true section.
    """
    if hyperplane.dim != cone.ambient_dim:
        raise ConeLabError("hyperplane and cone dimensions differ")
    normal = hyperplane.normal
    if not dual_interior_contains(cone, normal, margin):
        raise UnboundedSectionError("hyperplane normal is not inside the dual cone; section is unbounded")
    if hyperplane.offset <= 0.0:
        raise ConeLabError("hyperplane misses the cone interior")
    p0 = cone.axis * (hyperplane.offset / (normal @ cone.axis))
    p0.setflags(write=False)
    basis = orthonormal_complement(normal)
    dirs = _plane_directions(basis.shape[1], num_samples, seed) @ basis.T
    t = ray_exit(cone, p0, dirs)
    samples = p0 + t[:, None] * dirs
    if not cone.is_quadratic and basis.shape[1] >= 2:
        samples = np.vstack([samples, _polyhedral_vertices(cone, normal, hyperplane.offset)])
    samples.setflags(write=False)
    centroid = section_centroid(cone, normal, hyperplane.offset, p0, basis)
    poly = p0 + basis @ polytope_centroid((samples - p0) @ basis, np.zeros(basis.shape[1]))
    centroid.setflags(write=False)
    return Section(
        cone,
        hyperplane,
        basis,
        p0,
        samples,
        centroid,
        float(np.linalg.norm(centroid - poly)),
        int(num_samples),
        int(seed),
    )


def centroid_of_section(section: Section) -> tuple[np.ndarray, float]:
    """Centroid of the sampled boundary polytope and an error estimate.

    The estimate is the displacement of the same computation at doubled
    sampling density.
    """

    def sampled(sec):
        y = polytope_centroid(sec.coords(sec.boundary_samples), np.zeros(sec.dim))
        return sec.lift(y)

    c = sampled(section)
    finer = section_of(section.cone, section.hyperplane, 2 * section.num_samples, margin=0.0, seed=section.seed)
    return c, float(np.linalg.norm(sampled(finer) - c))


# --------------------------------------------------------------------------
# sampling helpers


def interior_points(cone: ConeSpec, count: int, seed: int = 0, depths=(0.25, 0.5, 0.8)) -> np.ndarray:
    """Deterministic interior points: the axis, then seeded off-axis points.

    Point ``k > 0`` sits at fraction ``depths[k % len(depths)]`` of the way
    from the axis to the boundary along a random direction orthogonal to
    the witness (so the ray stays in a bounded section), rescaled by a
    random factor in ``[0.5, 2]``.
    """
    rng = np.random.default_rng(seed)
    n = cone.ambient_dim
    basis = orthonormal_complement(cone.witness)
    out = [cone.axis.copy()]
    for k in range(1, count):
        v = basis @ rng.standard_normal(n - 1)
        v /= np.linalg.norm(v)
        t = ray_exit(cone, cone.axis, v[None, :])[0]
        scale = math.exp(rng.uniform(math.log(0.5), math.log(2.0)))
        out.append(scale * (cone.axis + depths[k % len(depths)] * t * v))
    return np.array(out[:count])


def dual_normals(cone: ConeSpec, count: int, seed: int = 0, max_tilt: float = 0.8) -> np.ndarray:
    """Seeded unit normals inside the dual cone, the witness first.

    Each later normal tilts the witness along a random direction
    orthogonal to the axis by a fraction in ``[0.1, max_tilt]`` of the way
    to the dual boundary.
    """
    rng = np.random.default_rng(seed)
    n = cone.ambient_dim
    basis = orthonormal_complement(cone.axis)
    out = [cone.witness.copy()]
    for _ in range(1, count):
        v = basis @ rng.standard_normal(n - 1)
        v /= np.linalg.norm(v)
        t = _exit_times(lambda U: _dual_inside(cone, U), cone.witness, v[None, :])[0]
        u = cone.witness + rng.uniform(0.1, max_tilt) * t * v
        out.append(u / np.linalg.norm(u))
    return np.array(out[:count])


# --------------------------------------------------------------------------
# JSON interface

_FIELDS = {"variant", "dim", "Q", "time_axis", "rays", "base_normal", "base_offset", "base_vertices"}
_REQUIRED = {
    "quadratic": {"Q", "time_axis"},
    "polyhedral": {"rays"},
    "basebody": {"base_normal", "base_offset", "base_vertices"},
}


def _finite(obj, path):
    if isinstance(obj, bool):
        raise InvalidConeError(f"{path}: expected a number, got a boolean")
    if isinstance(obj, (int, float)):
        if not math.isfinite(obj):
            raise InvalidConeError(f"{path}: non-finite number")
        return
    if isinstance(obj, list):
        for i, item in enumerate(obj):
            _finite(item, f"{path}[{i}]")
        return
    raise InvalidConeError(f"{path}: expected numbers, got {type(obj).__name__}")


def cone_from_dict(data: dict) -> ConeSpec:
    if not isinstance(data, dict):
        raise InvalidConeError("cone definition must be a JSON object")
    unknown = set(data) - _FIELDS
    if unknown:
        raise InvalidConeError(f"unknown fields: {sorted(unknown)}")
    variant = data.get("variant")
    if variant not in _REQUIRED:
        raise InvalidConeError(f"variant must be one of {sorted(_REQUIRED)}, got {variant!r}")
    missing = _REQUIRED[variant] - set(data)
    if missing:
        raise InvalidConeError(f"{variant} cone is missing {sorted(missing)}")
    extra = (set(data) - {"variant", "dim"}) - _REQUIRED[variant]
    if extra:
        raise InvalidConeError(f"fields {sorted(extra)} do not apply to a {variant} cone")
    for key in set(data) - {"variant"}:
        _finite(data[key], key)
    if variant == "quadratic":
        cone = ConeSpec.quadratic(data["Q"], data["time_axis"])
    elif variant == "polyhedral":
        cone = ConeSpec.polyhedral(data["rays"])
    else:
        cone = ConeSpec.basebody(data["base_normal"], data["base_offset"], data["base_vertices"])
    if "dim" in data and data["dim"] != cone.ambient_dim:
        raise InvalidConeError(f"dim field {data['dim']} does not match data dimension {cone.ambient_dim}")
    return cone


def cone_to_dict(cone: ConeSpec) -> dict:
    out = {"variant": cone.variant, "dim": cone.ambient_dim}
    if cone.variant == "quadratic":
        out["Q"] = cone.Q.tolist()
        out["time_axis"] = cone.time_axis.tolist()
    elif cone.variant == "polyhedral":
        out["rays"] = cone.rays.tolist()
    else:
        out["base_normal"] = cone.base_plane.normal.tolist()
        out["base_offset"] = cone.base_plane.offset
        out["base_vertices"] = cone.base_vertices.tolist()
    return out


def load_cone(path) -> ConeSpec:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise InvalidConeError(f"{p}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConeError(f"{p}: invalid JSON ({exc})") from exc
    return cone_from_dict(data)


def save_cone(cone: ConeSpec, path) -> None:
    Path(path).write_text(json.dumps(cone_to_dict(cone), indent=2) + "\n")
