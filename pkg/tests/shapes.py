"""Cones and independent geometric oracles shared by the test modules."""

import numpy as np
from scipy.spatial import ConvexHull

from conelab import ConeSpec, Hyperplane
from conelab.families import kgon, lorentz


def square_cone():
    return kgon(4)


def triangle_cone():
    return kgon(3)


def wedge():
    """The 2-d cone x0 >= |x1|."""
    return ConeSpec.polyhedral([[1.0, 1.0], [1.0, -1.0]])


def polygon_cone(vertices):
    """Cone in R^3 over a planar polygon placed at height x0 = 1."""
    v = np.asarray(vertices, dtype=float)
    return ConeSpec.basebody([1.0, 0.0, 0.0], 1.0, np.column_stack([np.ones(len(v)), v]))


def random_polygon(rng, count=9, jitter=0.5):
    """Convex polygon (counter-clockwise hull vertices) containing the origin."""
    ang = 2.0 * np.pi * (np.arange(count) + rng.uniform(0.0, 0.8, count)) / count
    rad = 1.0 + jitter * rng.uniform(-1.0, 1.0, count)
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    hull = ConvexHull(pts)
    return pts[hull.vertices]


def random_polytope_cone(rng, dim):
    """Polyhedral cone in R^dim over a random polytope around the x0 axis."""
    k = dim - 1
    count = 2 * dim + 3
    y = rng.standard_normal((count, k))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    y *= rng.uniform(0.6, 1.4, (count, 1))
    return ConeSpec.polyhedral(np.column_stack([np.ones(count), y]))


def base_plane(dim, height=1.0):
    e0 = np.zeros(dim)
    e0[0] = 1.0
    return Hyperplane(e0, height)


def shoelace_centroid(poly):
    """Area centroid of a simple polygon (vertices in order)."""
    x, y = np.asarray(poly, dtype=float).T
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * area)


def ray_polygon_distance(poly, origin, direction):
    """Distance from ``origin`` to the polygon boundary along ``direction`` (brute force over edges)."""
    poly = np.asarray(poly, dtype=float)
    best = np.inf
    for p, q in zip(poly, np.roll(poly, -1, axis=0)):
        m = np.column_stack([direction, p - q])
        if abs(np.linalg.det(m)) < 1e-14:
            continue
        t, s = np.linalg.solve(m, p - origin)
        if t > 0 and -1e-12 <= s <= 1 + 1e-12:
            best = min(best, t)
    return best


def radial_quadrature_centroid(section, count=4096):
    """Centroid of a 2-d section from its radial function (periodic trapezoid rule).

    Uses ``c = c0 + (2/3) ∫ ρ³ u dθ / ∫ ρ² dθ`` about the section's interior
    point ``c0``; independent of the closed-form and sampled centroids.
    """
    c0 = section.interior_point
    th = 2.0 * np.pi * np.arange(count) / count
    U = np.column_stack([np.cos(th), np.sin(th)])
    rho = section.radial(c0, U)
    area = 0.5 * np.sum(rho**2)
    moment = np.sum((rho**3)[:, None] * U, axis=0) / 3.0
    return section.lift(moment / area)
