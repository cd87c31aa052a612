"""Seeded generators for ellipsoidal and non-ellipsoidal cone families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import ConeSpec
from .errors import ConeLabError
from .linalg import sphere_directions

__all__ = ["FamilyMember", "generate_family", "parse_family", "standard_family", "FAMILY_KINDS"]

FAMILY_KINDS = ("lorentz", "affine-ellipsoidal", "kgon", "lp-ball", "perturbed-ellipsoidal")


@dataclass(frozen=True, eq=False)
class FamilyMember:
    cone_id: str
    cone: ConeSpec


def _lorentz_form(dim):
    return np.diag([1.0] + [-1.0] * (dim - 1))


def lorentz(dim: int) -> ConeSpec:
    e0 = np.zeros(dim)
    e0[0] = 1.0
    return ConeSpec.quadratic(_lorentz_form(dim), e0)


def affine_ellipsoidal(dim: int, rng, cond: float = 50.0) -> ConeSpec:
    """Linear image ``M^{-1} L`` of the Lorentz cone with ``cond(M) <= cond``."""
    U, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    V, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    s = np.exp(rng.uniform(0.0, np.log(cond), dim))
    M = U @ np.diag(s) @ V.T
    Q = M.T @ _lorentz_form(dim) @ M
    Q = 0.5 * (Q + Q.T)
    e0 = np.zeros(dim)
    e0[0] = 1.0
    return ConeSpec.quadratic(Q, np.linalg.solve(M, e0))


def kgon(k: int) -> ConeSpec:
    """Cone in R^3 over the regular k-gon circumscribed about the unit circle."""
    if k < 3:
        raise ConeLabError("k-gon needs k >= 3")
    ang = np.pi / k + 2.0 * np.pi * np.arange(k) / k
    r = 1.0 / np.cos(np.pi / k)
    rays = np.column_stack([np.ones(k), r * np.cos(ang), r * np.sin(ang)])
    return ConeSpec.polyhedral(rays / np.linalg.norm(rays, axis=1, keepdims=True))


def lp_ball(dim: int, p: float, vertices: int = 64) -> ConeSpec:
    """Cone over a polytope inscribed in the unit l_p ball (``vertices`` boundary points)."""
    if p <= 0:
        raise ConeLabError("l_p exponent must be positive")
    w = sphere_directions(dim - 1, vertices)
    y = w / (np.sum(np.abs(w) ** p, axis=1, keepdims=True) ** (1.0 / p))
    verts = np.column_stack([np.ones(len(y)), y])
    e0 = np.zeros(dim)
    e0[0] = 1.0
    return ConeSpec.basebody(e0, 1.0, verts)


def perturbed_ellipsoidal(dim: int, eta: float, rng, vertices: int = 64, axes=None) -> ConeSpec:
    """Cone over ellipsoid boundary samples with radial noise of amplitude ``eta``.

    With ``eta == 0`` the base is the ellipsoid itself and the quadratic
    cone over it is returned.
    """
    if eta < 0:
        raise ConeLabError("noise amplitude must be non-negative")
    k = dim - 1
    axes = np.linspace(1.0, 0.6, k) if axes is None else np.asarray(axes, dtype=float)
    e0 = np.zeros(dim)
    e0[0] = 1.0
    if eta == 0:
        return ConeSpec.quadratic(np.diag(np.concatenate([[1.0], -1.0 / axes**2])), e0)
    w = sphere_directions(k, vertices)
    noise = 1.0 + eta * rng.uniform(-1.0, 1.0, len(w))
    y = axes * w * noise[:, None]
    return ConeSpec.basebody(e0, 1.0, np.column_stack([np.ones(len(y)), y]))


def _as_list(value, cast):
    if isinstance(value, (list, tuple)):
        return [cast(v) for v in value]
    return [cast(value)]


def generate_family(kind: str, dims, params: dict | None = None, seed: int = 0) -> list[FamilyMember]:
    """Build a list of cones of one kind.

    ``dims`` is an integer or a list cycled over the members.  Recognised
    parameters: ``count`` (lorentz, affine-ellipsoidal), ``cond``
    (affine-ellipsoidal), ``k`` (kgon; one cone per value), ``p`` (lp-ball;
    one per value), ``eta`` (perturbed-ellipsoidal; one per value) and
    ``vertices`` (lp-ball, perturbed-ellipsoidal).  Member ``i`` draws from
    ``default_rng([seed, i])``.
    """
    params = dict(params or {})
    dims = _as_list(dims, int)
    if any(d < 2 for d in dims):
        raise ConeLabError("cone dimension must be at least 2")
    if kind not in FAMILY_KINDS:
        raise ConeLabError(f"unknown family {kind!r}; expected one of {FAMILY_KINDS}")
    known = {
        "lorentz": {"count"},
        "affine-ellipsoidal": {"count", "cond"},
        "kgon": {"k"},
        "lp-ball": {"p", "vertices"},
        "perturbed-ellipsoidal": {"eta", "vertices"},
    }[kind]
    unknown = set(params) - known
    if unknown:
        raise ConeLabError(f"unknown parameters for {kind}: {sorted(unknown)}")

    def rng(i):
        return np.random.default_rng([seed, i])

    out = []
    if kind == "lorentz":
        count = int(params.get("count", len(dims)))
        for i in range(count):
            d = dims[i % len(dims)]
            out.append(FamilyMember(f"lorentz-d{d}-{i}", lorentz(d)))
    elif kind == "affine-ellipsoidal":
        count = int(params.get("count", len(dims)))
        cond = float(params.get("cond", 50.0))
        if cond < 1:
            raise ConeLabError("condition-number cap must be >= 1")
        for i in range(count):
            d = dims[i % len(dims)]
            out.append(FamilyMember(f"affine-ellipsoidal-d{d}-{i}", affine_ellipsoidal(d, rng(i), cond)))
    elif kind == "kgon":
        if any(d != 3 for d in dims):
            raise ConeLabError("k-gon cones live in dimension 3")
        for k in _as_list(params.get("k", 4), int):
            out.append(FamilyMember(f"kgon-k{k}", kgon(k)))
    elif kind == "lp-ball":
        vertices = int(params.get("vertices", 64))
        for i, p in enumerate(_as_list(params.get("p", 4.0), float)):
            for d in dims:
                out.append(FamilyMember(f"lp-ball-p{p:g}-d{d}", lp_ball(d, p, vertices)))
    else:
        vertices = int(params.get("vertices", 64))
        for i, eta in enumerate(_as_list(params.get("eta", 0.1), float)):
            for d in dims:
                out.append(
                    FamilyMember(f"perturbed-eta{eta:g}-d{d}", perturbed_ellipsoidal(d, eta, rng(i), vertices))
                )
    return out


def _parse_values(text):
    if "-" in text and not text.startswith("-"):
        lo, hi = text.split("-", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            pass
    vals = []
    for part in text.split("/"):
        try:
            vals.append(int(part))
        except ValueError:
            vals.append(float(part))
    return vals if len(vals) > 1 else vals[0]


def parse_family(spec: str) -> tuple[str, list[int], dict]:
    """Parse ``kind:dims[:key=val,...]``.

    ``dims`` and parameter values accept a single number, an inclusive
    integer range ``a-b`` or a ``/``-separated list, e.g.
    ``kgon:3:k=3-8`` or ``affine-ellipsoidal:3-6:count=5``.
    """
    parts = spec.split(":")
    if len(parts) not in (2, 3) or not parts[0]:
        raise ConeLabError(f"family spec {spec!r} is not of the form kind:dims[:key=val,...]")
    kind = parts[0]
    try:
        dims = _parse_values(parts[1])
    except ValueError as exc:
        raise ConeLabError(f"bad dimension list in {spec!r}") from exc
    params = {}
    if len(parts) == 3 and parts[2]:
        for item in parts[2].split(","):
            if "=" not in item:
                raise ConeLabError(f"bad parameter {item!r} in {spec!r}")
            key, val = item.split("=", 1)
            try:
                params[key] = _parse_values(val)
            except ValueError as exc:
                raise ConeLabError(f"bad value for {key} in {spec!r}") from exc
    return kind, _as_list(dims, int), params


STANDARD_FAMILY = (
    "affine-ellipsoidal:3-6:count=5",
    "kgon:3:k=3-8",
    "lp-ball:3:p=1/4",
)


def standard_family(seed: int = 0) -> list[FamilyMember]:
    """Five affine-ellipsoidal cones (dims 3-6), k-gons for k=3..8, l_1 and l_4 balls."""
    out = []
    for spec in STANDARD_FAMILY:
        kind, dims, params = parse_family(spec)
        out.extend(generate_family(kind, dims, params, seed))
    return out
