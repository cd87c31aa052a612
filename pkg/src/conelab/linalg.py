"""Small dense linear algebra and affine-geometry primitives.

Everything here works on plain ``numpy`` arrays.  Dimensions are tiny
(ambient dimension rarely above 8), so the routines favour robustness
and determinism over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import norm as _normal
from scipy.stats import qmc

from .errors import ConeLabError

__all__ = [
    "Hyperplane",
    "EigenDecomposition",
    "symmetric_eigen",
    "affine_rank",
    "fit_hyperplane",
    "orthonormal_complement",
    "sphere_directions",
    "diameter",
    "as_points",
]

UNIT_TOL = 1e-12


def as_vector(x, dim=None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ConeLabError(f"expected a non-empty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ConeLabError("vector has non-finite coordinates")
    if dim is not None and v.size != dim:
        raise ConeLabError(f"dimension mismatch: expected {dim}, got {v.size}")
    return v


def as_points(points) -> np.ndarray:
    """Stack a point list into an ``(m, d)`` float array, validating shape."""
    if isinstance(points, np.ndarray):
        pts = np.asarray(points, dtype=float)
    else:
        pts = list(points)
        if not pts:
            raise ConeLabError("empty point list")
        dims = {np.asarray(p).size for p in pts}
        if len(dims) != 1:
            raise ConeLabError(f"points have mixed dimensions {sorted(dims)}")
        pts = np.asarray([np.asarray(p, dtype=float).ravel() for p in pts])
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ConeLabError("empty point list")
    if not np.all(np.isfinite(pts)):
        raise ConeLabError("points have non-finite coordinates")
    return pts


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Affine hyperplane ``{x : normal . x = offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal)
        if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            raise ConeLabError("hyperplane normal must have unit length")
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_normal(cls, normal, offset) -> "Hyperplane":
        """Build from an arbitrary nonzero normal, rescaling the offset to match."""
        n = as_vector(normal)
        length = np.linalg.norm(n)
        if length == 0.0:
            raise ConeLabError("zero hyperplane normal")
        return cls(n / length, float(offset) / length)

    @property
    def dim(self) -> int:
        return self.normal.size

    def signed_distance(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.normal - self.offset

    def to_dict(self) -> dict:
        return {"normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in descending order; eigenvectors are the matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def symmetric_eigen(m, max_sweeps: int = 100) -> EigenDecomposition:
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Symmetric matrix; asymmetry above ``1e-12`` relative is rejected.
    max_sweeps : int
        Upper bound on full sweeps over the off-diagonal entries.

    Returns
    -------
    EigenDecomposition
        Eigenvalues sorted in descending order, orthonormal eigenvectors
        stored column-wise.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ConeLabError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConeLabError("matrix has non-finite entries")
    scale = np.abs(a).max()
    if np.abs(a - a.T).max() > 1e-12 * max(scale, np.finfo(float).tiny):
        raise ConeLabError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    fro = np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= 1e-15 * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def _centered_spectrum(pts):
    x = pts - pts.mean(axis=0)
    eig = symmetric_eigen(x.T @ x)
    # Column norms of X V instead of sqrt(eigenvalue): the small singular
    # values keep absolute accuracy ~eps*|X| rather than ~sqrt(eps)*|X|.
    sigma = np.linalg.norm(x @ eig.eigenvectors, axis=0)
    order = np.argsort(-sigma, kind="stable")
    return sigma[order], eig.eigenvectors[:, order]


def affine_rank(points, rel_tol: float = 1e-8) -> tuple[int, np.ndarray]:
    """Dimension of the affine span of ``points``.

    Returns the number of singular values of the centred point matrix
    above ``rel_tol`` times the largest, and the full descending spectrum.
    """
    pts = as_points(points)
    sigma, _ = _centered_spectrum(pts)
    if sigma[0] == 0.0:
        return 0, sigma
    return int(np.sum(sigma > rel_tol * sigma[0])), sigma


def fit_hyperplane(points, rel_tol: float = 1e-8) -> tuple[Hyperplane, float]:
    """Least-squares hyperplane through the centroid of ``points``.

    The normal is the direction of the smallest singular value of the
    centred cloud.  Returns the hyperplane and the largest absolute
    distance of a point from it.
    """
    pts = as_points(points)
    m, d = pts.shape
    if m < d:
        raise ConeLabError(f"need at least {d} points to fit a hyperplane in R^{d}, got {m}")
    sigma, vecs = _centered_spectrum(pts)
    if sigma[0] == 0.0 or (d >= 2 and sigma[d - 2] <= rel_tol * sigma[0]):
        raise ConeLabError("degenerate point cloud: hyperplane normal is ambiguous")
    centroid = pts.mean(axis=0)
    normal = vecs[:, -1]
    offset = float(normal @ centroid)
    if offset < 0.0 or (offset == 0.0 and normal[np.argmax(np.abs(normal))] < 0):
        normal, offset = -normal, -offset
    normal = normal / np.linalg.norm(normal)
    plane = Hyperplane(normal, offset)
    return plane, float(np.abs(plane.signed_distance(pts)).max())


def orthonormal_complement(normal) -> np.ndarray:
    """Columns form an orthonormal basis of the complement of ``normal``.

    Built from a Householder reflection, so the result is a deterministic
    function of the input.
    """
    n = as_vector(normal)
    n = n / np.linalg.norm(n)
    d = n.size
    e = np.zeros(d)
    e[0] = 1.0
    sign = 1.0 if n[0] >= 0 else -1.0
    v = n + sign * e
    h = np.eye(d) - 2.0 * np.outer(v, v) / (v @ v)
    return h[:, 1:]


def sphere_directions(k: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors in ``R^k``.

    Uniform angles on the circle, a Fibonacci lattice on the 2-sphere,
    scrambled Halton points pushed through the normal quantile beyond.
    In one dimension the two unit vectors are returned regardless of
    ``count``.
    """
    if k < 1:
        raise ConeLabError("direction dimension must be positive")
    if k == 1:
        return np.array([[1.0], [-1.0]])
    if count < 1:
        raise ConeLabError("need at least one direction")
    if k == 2:
        ang = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if k == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        phi = np.pi * (3.0 - np.sqrt(5.0)) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    u = qmc.Halton(d=k, scramble=True, seed=seed).random(count)
    g = _normal.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def diameter(points) -> float:
    pts = as_points(points)
    if len(pts) < 2:
        return 0.0
    return float(pdist(pts).max())
