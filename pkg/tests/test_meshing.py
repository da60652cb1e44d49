import math

import pytest
from shapely.geometry import MultiPolygon, Polygon

from tcbforge.errors import GeometryError
from tcbforge.meshing import circle_polygon, prism_mesh, slab_stack_mesh, triangulate_region


def test_circle_polygon_area_matches_circle():
    for r in (0.3, 0.6, 1.0, 2.5):
        poly = circle_polygon((0, 0), r)
        assert poly.area == pytest.approx(math.pi * r * r, rel=1e-9)


def test_triangulate_region_covers_area():
    p = Polygon([(0, 0), (10, 0), (10, 10), (0, 10)],
                holes=[[(4, 4), (4, 6), (6, 6), (6, 4)]])
    tris = triangulate_region(p)
    total = 0.0
    for (a, b, c) in tris:
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
        assert area2 > 0  # CCW
        total += area2 / 2
    assert total == pytest.approx(p.area)


def test_prism_box():
    region = Polygon([(0, 0), (10, 0), (10, 5), (0, 5)])
    mesh = prism_mesh(region, 0.0, 1.2)
    assert mesh.is_watertight()
    assert not mesh.has_degenerate_triangles()
    assert mesh.volume() == pytest.approx(60.0)


def test_prism_with_hole():
    region = Polygon([(0, 0), (10, 0), (10, 10), (0, 10)],
                     holes=[[(4, 4), (4, 6), (6, 6), (6, 4)]])
    mesh = prism_mesh(region, 0.0, 2.0)
    assert mesh.is_watertight()
    assert mesh.volume() == pytest.approx((100 - 4) * 2.0)


def test_prism_multipolygon():
    region = MultiPolygon([
        Polygon([(0, 0), (3, 0), (3, 3), (0, 3)]),
        Polygon([(10, 0), (13, 0), (13, 3), (10, 3)]),
    ])
    mesh = prism_mesh(region, 0.0, 1.0)
    assert mesh.is_watertight()
    assert mesh.volume() == pytest.approx(18.0)


def test_prism_rejects_empty_interval():
    with pytest.raises(GeometryError):
        prism_mesh(Polygon([(0, 0), (1, 0), (1, 1)]), 1.0, 1.0)


def test_slab_stack_volume_and_census():
    outer = Polygon([(0, 0), (10, 0), (10, 10), (0, 10)])
    channel = Polygon([(2, 2), (8, 2), (8, 3), (2, 3)])
    slabs = [
        (outer.difference(channel), 0.0, 0.3),   # channel recessed in bottom
        (outer, 0.3, 1.2),
    ]
    mesh = slab_stack_mesh(slabs)
    assert mesh.is_watertight()
    expected = (100 - 6) * 0.3 + 100 * 0.9
    assert mesh.volume() == pytest.approx(expected)


def test_slab_stack_with_cylinder_cut():
    outer = Polygon([(0, 0), (10, 0), (10, 10), (0, 10)])
    hole = circle_polygon((5, 5), 0.6)
    mesh = slab_stack_mesh([(outer.difference(hole), 0.0, 1.2)])
    assert mesh.is_watertight()
    expected = (100 - math.pi * 0.36) * 1.2
    assert mesh.volume() == pytest.approx(expected, rel=1e-6)
