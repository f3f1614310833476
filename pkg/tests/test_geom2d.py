import math

import numpy as np
import pytest

from fractube import (
    GeometryError,
    Polygon,
    SelfSimilarSystem,
    Similitude,
    TilesetError,
    apply_word,
    convex_hull_of_attractor,
    inner_tube_polygon,
    inradius,
    intrinsic_volumes,
    polygon_difference_components,
    steiner_outer_tube,
)
from fractube.geom2d import inner_offset_polygon, word_ratio

SQRT3 = math.sqrt(3.0)

UNIT_SQUARE = Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def equilateral(side):
    return Polygon([(0, 0), (side, 0), (side / 2, side * SQRT3 / 2)])


# ---------------------------------------------------------------------------
# similitudes and words


def test_similitude_contracts_distances():
    rng = np.random.default_rng(7)
    for _ in range(20):
        ratio = rng.uniform(0.05, 0.95)
        sim = Similitude(ratio, rotation=rng.uniform(0, 2 * np.pi),
                         reflect=bool(rng.integers(2)), translation=rng.normal(size=2))
        a, b = rng.normal(size=(2, 2))
        da = np.linalg.norm(sim(a) - sim(b))
        # applying the map twice scales distances by ratio^2
        daa = np.linalg.norm(sim(sim(a)) - sim(sim(b)))
        assert abs(da - ratio * np.linalg.norm(a - b)) < 1e-12
        assert abs(daa - ratio**2 * np.linalg.norm(a - b)) < 1e-12


def test_similitude_rejects_noncontractive():
    with pytest.raises(ValueError):
        Similitude(1.0)
    with pytest.raises(ValueError):
        Similitude(1.5)
    with pytest.raises(ValueError):
        Similitude(0.0)


def test_apply_word_cantor(cantor_system):
    # first letter acts first: word (1,2) sends 0 through x/3 then x/3 + 2/3
    out = apply_word(cantor_system, (1, 2), [[0.0]])
    assert abs(out[0, 0] - 2.0 / 3.0) < 1e-15
    assert abs(word_ratio(cantor_system, (1, 2)) - 1.0 / 9.0) < 1e-16


def test_apply_word_gasket_first_map(gasket_system):
    tri = np.array([(0, 0), (1, 0), (0.5, SQRT3 / 2)])
    out = apply_word(gasket_system, (1,), tri)
    assert np.allclose(out, tri / 2, atol=1e-15)


def test_apply_word_empty_is_identity(gasket_system):
    pts = np.array([[0.3, 0.4], [1.0, -2.0]])
    out = apply_word(gasket_system, (), pts)
    assert np.array_equal(out, pts)
    assert word_ratio(gasket_system, ()) == 1.0


# ---------------------------------------------------------------------------
# attractor hulls


def test_gasket_hull_is_unit_triangle(gasket_system):
    hull = convex_hull_of_attractor(gasket_system)
    expected = {(0.0, 0.0), (1.0, 0.0), (0.5, SQRT3 / 2)}
    got = {tuple(v) for v in np.round(hull.vertices, 12)}
    assert {tuple(np.round(e, 12)) for e in expected} == got
    assert abs(hull.area - SQRT3 / 4) < 1e-12


def test_single_map_hull_degenerates():
    system = SelfSimilarSystem(maps=(Similitude(0.5, translation=(0.3, 0.4)),), dim=2)
    with pytest.raises(GeometryError):
        convex_hull_of_attractor(system)


def test_koch_hull_area_matches_tile_sum(koch_system):
    # oracle: total tile area = area(G) * sum (2/3)^k = 3 * area(G),
    # with G the side-1/3 equilateral triangle
    hull = convex_hull_of_attractor(koch_system)
    tile_area_total = 3.0 * (SQRT3 / 4.0) * (1.0 / 9.0)
    assert abs(hull.area - tile_area_total) < 1e-12
    # the hull is the triangle over the base segment and the curve's peak
    assert len(hull.vertices) == 3


# ---------------------------------------------------------------------------
# inradius


def test_inradius_equilateral_half():
    assert abs(inradius(equilateral(0.5)) - 1 / (4 * SQRT3)) < 1e-15


def test_inradius_equilateral_third():
    assert abs(inradius(equilateral(1.0 / 3.0)) - SQRT3 / 18) < 1e-15


def test_inradius_unit_square_lp():
    assert abs(inradius(UNIT_SQUARE) - 0.5) < 1e-9


def test_degenerate_polygon_rejected():
    with pytest.raises(GeometryError):
        Polygon([(0, 0), (1, 0), (2, 0)])


# ---------------------------------------------------------------------------
# inner tubes


def test_inner_tube_equilateral_closed_form():
    rho = 1 / (4 * SQRT3)
    tri = equilateral(0.5)
    for eps in np.linspace(0.0, rho, 17):
        expected = 6 * SQRT3 * rho * eps - 3 * SQRT3 * eps * eps
        assert abs(inner_tube_polygon(tri, eps) - expected) < 1e-14


def test_inner_tube_zero():
    assert inner_tube_polygon(UNIT_SQUARE, 0.0) == 0.0


def test_inner_tube_unit_square():
    # inward offset square has side 1 - 2 eps
    assert abs(inner_tube_polygon(UNIT_SQUARE, 0.1) - (1 - 0.8**2)) < 1e-14


def test_inner_tube_saturates_and_monotone():
    poly = Polygon([(0, 0), (2, 0), (2.3, 1.1), (0.9, 1.7), (-0.4, 0.8)])
    rho = inradius(poly)
    grid = np.linspace(0, 2 * rho, 101)
    vals = [inner_tube_polygon(poly, e) for e in grid]
    assert all(b - a > -1e-12 for a, b in zip(vals, vals[1:]))
    assert abs(vals[-1] - poly.area) < 1e-12
    for e in grid[grid >= rho]:
        assert inner_tube_polygon(poly, e) == poly.area
    # continuity on a fine grid
    diffs = np.abs(np.diff(vals))
    assert diffs.max() < poly.perimeter * (grid[1] - grid[0]) * 1.5


def test_inner_offset_polygon_requires_convex():
    notch = Polygon([(0, 0), (4, 0), (4, 3), (2, 3), (2, 1.5), (0, 1.5)])
    assert not notch.is_convex
    with pytest.raises(GeometryError):
        inner_offset_polygon(notch, 0.1)


def test_inner_tube_nonconvex_monotone_saturates():
    notch = Polygon([(0, 0), (4, 0), (4, 3), (2, 3), (2, 1.5), (0, 1.5)])
    rho = inradius(notch)
    vals = [inner_tube_polygon(notch, e) for e in np.linspace(0, 1.2 * rho, 40)]
    assert all(b - a > -1e-9 for a, b in zip(vals, vals[1:]))
    assert abs(vals[-1] - notch.area) < 1e-9


# ---------------------------------------------------------------------------
# Steiner tube


def test_steiner_outer_unit_square():
    # 4 edge rectangles + 4 quarter disks
    assert abs(steiner_outer_tube(UNIT_SQUARE, 1.0) - (4 + math.pi)) < 1e-14


def test_steiner_outer_zero_and_full():
    assert steiner_outer_tube(UNIT_SQUARE, 0.0) == 0.0
    assert steiner_outer_tube(UNIT_SQUARE, 0.0, exterior=False) == UNIT_SQUARE.area
    for eps in (0.2, 0.7, 1.9):
        full = steiner_outer_tube(UNIT_SQUARE, eps, exterior=False)
        ext = steiner_outer_tube(UNIT_SQUARE, eps)
        assert abs(full - ext - UNIT_SQUARE.area) < 1e-14


def test_steiner_outer_monte_carlo():
    # rejection sampling oracle: sample the padded bounding box and count
    # points within eps of the polygon but outside it
    poly = Polygon([(0, 0), (1.4, 0.1), (1.9, 1.0), (0.8, 1.6), (-0.2, 0.9)])
    eps = 0.35
    rng = np.random.default_rng(42)
    n = 1_000_000
    lo = poly.vertices.min(axis=0) - eps
    hi = poly.vertices.max(axis=0) + eps
    pts = rng.uniform(lo, hi, size=(n, 2))
    import shapely

    sp = shapely.geometry.Polygon(poly.vertices)
    dist = shapely.distance(shapely.points(pts), sp)
    inside = shapely.contains_xy(sp, pts[:, 0], pts[:, 1])
    hit = (dist <= eps) & ~inside
    p_hat = hit.mean()
    box_area = np.prod(hi - lo)
    estimate = p_hat * box_area
    se = box_area * math.sqrt(p_hat * (1 - p_hat) / n)
    assert abs(steiner_outer_tube(poly, eps) - estimate) < 3 * se


# ---------------------------------------------------------------------------
# intrinsic volumes


def test_intrinsic_volume_table():
    mu = intrinsic_volumes(UNIT_SQUARE).mu
    assert mu == (1.0, 2.0, 1.0)


def test_intrinsic_volume_homogeneity():
    poly = Polygon([(0, 0), (1.3, 0.2), (1.8, 1.1), (0.4, 1.5)])
    mu = intrinsic_volumes(poly).mu
    for x in (0.5, 2.0, 3.7):
        scaled = Polygon(np.asarray(poly.vertices) * x)
        mu_x = intrinsic_volumes(scaled).mu
        for i in range(3):
            assert abs(mu_x[i] - mu[i] * x**i) < 1e-10 * max(1.0, mu[i] * x**i)


def test_intrinsic_volume_motion_invariance():
    poly = Polygon([(0, 0), (1.3, 0.2), (1.8, 1.1), (0.4, 1.5)])
    mu = intrinsic_volumes(poly).mu
    rho = inradius(poly)
    rng = np.random.default_rng(3)
    for _ in range(100):
        th = rng.uniform(0, 2 * np.pi)
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        moved = Polygon(np.asarray(poly.vertices) @ rot.T + rng.normal(scale=5, size=2))
        mu_m = intrinsic_volumes(moved).mu
        assert all(abs(a - b) < 1e-10 for a, b in zip(mu, mu_m))
        assert abs(inradius(moved) - rho) < 1e-9


def test_exterior_angles_sum():
    for poly in (UNIT_SQUARE, equilateral(1.0), Polygon([(0, 0), (2, 0), (2.5, 1), (1, 2), (-0.5, 1)])):
        ext = np.pi - poly.interior_angles()
        assert abs(ext.sum() - 2 * np.pi) < 1e-9


# ---------------------------------------------------------------------------
# difference components


def test_gasket_difference_is_middle_triangle(gasket_system):
    hull = convex_hull_of_attractor(gasket_system)
    images = [Polygon(m(np.asarray(hull.vertices))) for m in gasket_system.maps]
    comps = polygon_difference_components(hull, images)
    assert len(comps) == 1
    mid = comps[0]
    assert len(mid.vertices) == 3
    assert abs(mid.area - SQRT3 / 16) < 1e-9
    # inverted: its topmost edge is horizontal, apex points down
    ys = sorted(v[1] for v in mid.vertices)
    assert abs(ys[1] - ys[2]) < 1e-12 and ys[0] < ys[1]


def test_koch_difference_is_third_triangle(koch_system):
    hull = convex_hull_of_attractor(koch_system)
    images = [Polygon(m(np.asarray(hull.vertices))) for m in koch_system.maps]
    comps = polygon_difference_components(hull, images)
    assert len(comps) == 1
    assert abs(comps[0].area - SQRT3 / 36) < 1e-9
    sides = [np.linalg.norm(b - a) for a, b in comps[0].edges()]
    assert all(abs(s - 1 / 3) < 1e-8 for s in sides)


def test_pentagasket_difference_components(pentagasket_system):
    hull = convex_hull_of_attractor(pentagasket_system)
    images = [Polygon(m(np.asarray(hull.vertices))) for m in pentagasket_system.maps]
    comps = polygon_difference_components(hull, images)
    assert len(comps) == 6
    nverts = sorted(len(c.vertices) for c in comps)
    assert nverts[-1] == 5  # one regular pentagon
    tri_areas = sorted(c.area for c in comps)[:-1]
    assert max(tri_areas) - min(tri_areas) < 1e-9  # five congruent triangles
    total = sum(c.area for c in comps) + sum(p.area for p in images)
    assert abs(total - hull.area) < 1e-9 * hull.area


def test_difference_overlap_rejected():
    outer = UNIT_SQUARE
    a = Polygon([(0.1, 0.1), (0.6, 0.1), (0.6, 0.6), (0.1, 0.6)])
    b = Polygon([(0.4, 0.4), (0.9, 0.4), (0.9, 0.9), (0.4, 0.9)])
    with pytest.raises(TilesetError):
        polygon_difference_components(outer, [a, b])
