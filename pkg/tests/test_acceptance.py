"""Acceptance suite: one test group per criterion, numbered 1 to 10.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints
one PASS/FAIL line per criterion.
"""

import hashlib
import json

import numpy as np
import pytest

from shapes import base_plane, polygon_cone, random_polygon, random_polytope_cone, ray_polygon_distance, wedge
from conelab import (
    ConeSpec,
    Hyperplane,
    Membership,
    analytic_fbi_hyperplane,
    centroid_of_section,
    contains,
    css_sweep,
    fbi_defect,
    find_centroid_section,
    gamma_central_symmetry_check,
    gamma_curve,
    gamma_scale,
    hammer_check,
    inscribed_parallelogram,
    section_boundary_equality,
    section_of,
    symmetry_defect,
)
from conelab.cli import main
from conelab.cones import boundary_margin, dual_normals, interior_points
from conelab.families import generate_family, kgon, lorentz
from conelab.linalg import diameter


def _all_families():
    members = []
    members += generate_family("lorentz", [3, 4, 5], {"count": 3})
    members += generate_family("affine-ellipsoidal", [3, 4, 5, 6], {"count": 4}, seed=1)
    members += generate_family("kgon", 3, {"k": [3, 4, 5, 6, 7, 8]})
    members += generate_family("lp-ball", [3, 4], {"p": [1, 4], "vertices": 48})
    members += generate_family("perturbed-ellipsoidal", 3, {"eta": [0.0, 0.1]}, seed=2)
    rng = np.random.default_rng(12)
    members += [type(members[0])(f"polytope-d{d}", random_polytope_cone(rng, d)) for d in (3, 4, 5)]
    return members


# 1 ---------------------------------------------------------------------------


def test_criterion_01_gamma_on_analytic_plane():
    cones = generate_family("affine-ellipsoidal", [3, 4, 5, 6], {"count": 20}, seed=101)
    assert len(cones) == 20
    worst = 0.0
    for i, m in enumerate(cones):
        for a in interior_points(m.cone, 10, seed=i):
            g = gamma_curve(m.cone, a, 64).points
            plane = analytic_fbi_hyperplane(m.cone, a)
            worst = max(worst, np.abs(plane.signed_distance(g)).max() / diameter(g))
    assert worst <= 1e-8


# 2 ---------------------------------------------------------------------------


@pytest.mark.parametrize("member", _all_families(), ids=lambda m: m.cone_id)
def test_criterion_02_gamma_central_symmetry(member):
    for a in interior_points(member.cone, 10, seed=7):
        curve = gamma_curve(member.cone, a, 64)
        assert gamma_central_symmetry_check(member.cone, curve) <= 1e-8


# 3 ---------------------------------------------------------------------------


@pytest.mark.parametrize("member", _all_families()[::3], ids=lambda m: m.cone_id)
def test_criterion_03_gamma_scales(member):
    cone = member.cone
    for a in interior_points(cone, 10, seed=3):
        curve = gamma_curve(cone, a, 64)
        for s in curve.samples:
            assert 0.0 < s.scale < 1.0 / s.lam
            assert contains(cone, s.gamma_point, tol=1e-8) is Membership.BOUNDARY
            assert contains(cone, a - s.gamma_point, tol=1e-8) is Membership.BOUNDARY


def test_criterion_03_planar_worked_case():
    assert abs(gamma_scale([1.0, 1.0], [1.0, -1.0], [1.0, 0.0], 1.0) - 0.5) <= 1e-12
    curve = gamma_curve(wedge(), [1.0, 0.0], 16)
    assert np.all(np.abs(curve.scales - 0.5) <= 1e-12)


# 4 and 5 ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def standard_matrix(tmp_path_factory):
    out = tmp_path_factory.mktemp("eq") / "eq.json"
    code = main(["equivalence-matrix", "--family", "standard", "--out", str(out)])
    return code, json.loads(out.read_text())["results"]


def test_criterion_04_fbi_matches_fit(standard_matrix):
    code, rows = standard_matrix
    assert code == 0
    assert len(rows) == 13
    for row in rows:
        assert row["fbi_pass"] == row["is_ellipsoidal_fit"], row["cone_id"]
    assert sum(r["is_ellipsoidal_fit"] for r in rows) == 5


def test_criterion_04_single_point_is_not_enough():
    square = kgon(4)
    assert fbi_defect(square, [1.0, 0.0, 0.0]).flatness_defect <= 1e-8
    assert fbi_defect(square, [1.0, 0.3, 0.1]).flatness_defect >= 1e-3


def test_criterion_05_css_matches_fit(standard_matrix):
    code, rows = standard_matrix
    assert code == 0
    for row in rows:
        assert row["css_pass"] == row["is_ellipsoidal_fit"], row["cone_id"]


def _dense_defect(verts, count=20000):
    c = verts.mean(axis=0)
    worst = 0.0
    for t in np.linspace(0.0, np.pi, count, endpoint=False):
        u = np.array([np.cos(t), np.sin(t)])
        p, m = ray_polygon_distance(verts, c, u), ray_polygon_distance(verts, c, -u)
        worst = max(worst, abs(p - m) / (p + m))
    return worst


def test_criterion_05_triangle_defect():
    tri = kgon(3)
    assert css_sweep(tri, 32).max_symmetry_defect >= 0.2
    oracle = _dense_defect((tri.rays / tri.rays[:, :1])[:, 1:])
    for height in (0.5, 1.0, 2.5):
        d = symmetry_defect(section_of(tri, base_plane(3, height), 64))
        assert abs(d - 1.0 / 3.0) <= 1e-2
        assert abs(d - oracle) <= 1e-2


# 6 ---------------------------------------------------------------------------


def _hammer_sections():
    out = []
    for i in range(50):
        rng = np.random.default_rng([6, i])
        dim = 3 + i % 3
        cone = random_polytope_cone(rng, dim)
        u = dual_normals(cone, 4, seed=i)[i % 4]
        out.append(section_of(cone, Hyperplane(u, 1.0), 64, seed=i))
    return out


def test_criterion_06_hammer_bounds():
    sections = _hammer_sections()
    assert {s.dim for s in sections} == {2, 3, 4}
    for i, sec in enumerate(sections):
        rep = hammer_check(sec, 256, seed=i, tol=1e-6)
        assert rep.violations == 0


def test_criterion_06_triangle_medians():
    tri = kgon(3)
    sec = section_of(tri, base_plane(3), 64)
    verts = tri.rays / tri.rays[:, :1]
    c = sec.centroid
    for v in verts:
        u = sec.coords(v) - sec.coords(c)
        u /= np.linalg.norm(u)
        plus, minus = sec.radial(c, np.array([u, -u]))
        assert abs(minus / (plus + minus) - 1 / 3) <= 1e-6
        assert abs(plus / (plus + minus) - 2 / 3) <= 1e-6
    rep = hammer_check(sec, 256)
    assert abs(rep.min_mu - 1 / 3) <= 1e-6 and abs(rep.max_mu - 2 / 3) <= 1e-6


# 7 ---------------------------------------------------------------------------


def _search_cases():
    cases = []
    ell = generate_family("affine-ellipsoidal", [3, 4, 5], {"count": 5}, seed=17)
    ell = [lorentz(3), lorentz(4)] + [m.cone for m in ell]
    poly = [kgon(3), kgon(4), kgon(6)] + [random_polytope_cone(np.random.default_rng([7, d]), d) for d in (3, 4, 5, 4, 5)]
    for i, cone in enumerate(ell + poly):
        pts = interior_points(cone, 3, seed=100 + i)
        cases += [(cone, pts[1]), (cone, pts[2])]
    return cases[:30]


def test_criterion_07_centroid_search():
    cases = _search_cases()
    assert len(cases) == 30
    assert {c.ambient_dim for c, _ in cases} == {3, 4, 5}
    for cone, p in cases:
        res = find_centroid_section(cone, p, tol=1e-6)
        assert res.residual <= 1e-6
        normal = res.section.hyperplane.normal
        if cone.is_quadratic:
            # independent oracle: the section centred at p is the polar plane of p
            ref = cone.Q @ p
            assert np.arccos(min(1.0, abs(normal @ ref) / np.linalg.norm(ref))) <= 1e-5
        else:
            sampled, _ = centroid_of_section(res.section)
            assert np.linalg.norm(sampled - p) <= 1e-6 * np.linalg.norm(p)


def test_criterion_07_axis_case():
    for dim in (3, 4, 5):
        cone = lorentz(dim)
        p = 1.7 * cone.axis
        normal = find_centroid_section(cone, p).section.hyperplane.normal
        assert np.arccos(min(1.0, abs(normal @ cone.axis))) <= 1e-6


# 8 ---------------------------------------------------------------------------


def test_criterion_08_boundary_equality():
    cones = generate_family("affine-ellipsoidal", [3, 4, 5], {"count": 10}, seed=23)
    count = 0
    for i, m in enumerate(cones):
        for p in interior_points(m.cone, 3, seed=i)[1:]:
            u = m.cone.Q @ p
            sec = section_of(m.cone, Hyperplane.from_normal(u, u @ p), 64)
            assert section_boundary_equality(m.cone, sec) <= 1e-7
            count += 1
    assert count == 20
    square = kgon(4)
    assert section_boundary_equality(square, section_of(square, base_plane(3), 64)) <= 1e-7


# 9 ---------------------------------------------------------------------------


def _planar_sections():
    L = lorentz(3)
    secs = [section_of(L, base_plane(3), 64)]
    for a, b in ((2.0, 1.0), (1.0, 0.3), (0.5, 1.5)):
        cone = ConeSpec.quadratic(np.diag([1.0, -1.0 / a**2, -1.0 / b**2]), [1.0, 0.0, 0.0])
        secs.append(section_of(cone, base_plane(3), 64))
    for t in (0.2, 0.5):
        secs.append(section_of(L, Hyperplane.from_normal([1.0, t, -0.5 * t], 1.0), 64))
    secs.append(section_of(kgon(3), base_plane(3), 64))
    secs.append(section_of(kgon(3), Hyperplane.from_normal([1.0, 0.2, 0.1], 1.0), 64))
    i = 0
    while len(secs) < 20:
        poly = random_polygon(np.random.default_rng([9, i]), count=5 + i % 6)
        secs.append(section_of(polygon_cone(poly), base_plane(3), 64))
        i += 1
    return secs


def test_criterion_09_inscribed_parallelogram():
    sections = _planar_sections()
    assert len(sections) == 20
    for sec in sections:
        verts = inscribed_parallelogram(sec)
        assert verts.shape == (4, 3)
        assert np.abs(boundary_margin(sec.cone, verts)).max() <= 1e-9
        gap = np.linalg.norm(0.5 * (verts[0] + verts[2]) - 0.5 * (verts[1] + verts[3]))
        assert gap <= 1e-9


# 10 --------------------------------------------------------------------------

_RUNS = [
    ["fbi-sweep", "--family", "kgon:3:k=3/5", "--family", "affine-ellipsoidal:4", "--interior-points", "4"],
    ["css-sweep", "--family", "lp-ball:3:p=1/4", "--hyperplanes", "8"],
    ["equivalence-matrix", "--family", "kgon:3:k=4", "--family", "lorentz:3-4", "--interior-points", "3", "--hyperplanes", "8"],
    ["gamma-dump", "--family", "perturbed-ellipsoidal:3:eta=0/0.1", "--interior-points", "2", "--samples", "16"],
    ["hammer-stress", "--family", "kgon:3:k=3-5", "--hyperplanes", "6"],
    ["centroid-search", "--family", "kgon:3:k=4", "--family", "lorentz:3", "--interior-points", "3"],
]


def _digest(paths):
    return [hashlib.sha256(p.read_bytes()).hexdigest() for p in paths]


@pytest.mark.parametrize("args", _RUNS, ids=lambda a: a[0])
def test_criterion_10_determinism(tmp_path, args):
    paths = [tmp_path / "r.json", tmp_path / "r.csv", tmp_path / "r.trace.json"]
    argv = [*args, "--seed", "5", "--out", str(paths[0]), "--csv", str(paths[1]), "--trace", str(paths[2])]
    digests = []
    for _ in range(2):
        assert main(argv) == 0
        digests.append(_digest(paths))
        for path in paths:
            path.unlink()
    assert digests[0] == digests[1]
