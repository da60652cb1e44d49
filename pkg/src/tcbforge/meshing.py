"""Closed triangle shells from 2D regions.

Board solids are stacks of prisms: a planar region (shapely polygon, holes
allowed) swept over a z interval. Each prism is emitted as its own closed
shell; shells are concatenated without cross-shell vertex merging so the
combined mesh keeps every edge on exactly two triangles.
"""

from __future__ import annotations

import math

import shapely
from shapely.geometry import MultiPolygon, Polygon

from .errors import GeometryError
from .geometry import Mesh, MeshBuilder

# Discard slab regions and triangles below this area (mm^2); slivers this
# small are numerical noise from the boolean ops.
AREA_EPS = 1e-12

CIRCLE_SEGMENTS = 32


def circle_polygon(center, radius: float, segments: int = CIRCLE_SEGMENTS) -> Polygon:
    """Regular polygon approximating a circle, inflated so its area equals
    the true circle's (pi*r^2) instead of the inscribed polygon's."""
    if radius <= 0:
        raise GeometryError(f"circle radius must be positive, got {radius}")
    step = 2.0 * math.pi / segments
    r = radius * math.sqrt(step / math.sin(step))
    cx, cy = center
    pts = [(cx + r * math.cos(i * step), cy + r * math.sin(i * step))
           for i in range(segments)]
    return Polygon(pts)


def _polygon_parts(region) -> list[Polygon]:
    if region.is_empty:
        return []
    if isinstance(region, Polygon):
        parts = [region]
    elif isinstance(region, MultiPolygon):
        parts = list(region.geoms)
    else:  # GeometryCollection from a degenerate boolean: keep polygonal parts
        parts = [g for g in getattr(region, "geoms", []) if isinstance(g, Polygon)]
    return [p for p in parts if p.area > AREA_EPS]


def _ring_coords(ring, ccw: bool) -> list[tuple[float, float]]:
    coords = list(ring.coords[:-1])
    if shapely.is_ccw(ring) != ccw:
        coords.reverse()
    # drop consecutive duplicates
    out: list[tuple[float, float]] = []
    for c in coords:
        if out and abs(c[0] - out[-1][0]) < 1e-12 and abs(c[1] - out[-1][1]) < 1e-12:
            continue
        out.append((c[0], c[1]))
    if len(out) > 1 and abs(out[0][0] - out[-1][0]) < 1e-12 \
            and abs(out[0][1] - out[-1][1]) < 1e-12:
        out.pop()
    return out


def triangulate_region(region) -> list[tuple[tuple[float, float], ...]]:
    """Constrained Delaunay triangulation of a polygonal region.

    Returns CCW triangles whose corners are exactly the region's boundary
    vertices (no Steiner points), so caps and walls built from the same
    region share vertices exactly.
    """
    triangles: list[tuple[tuple[float, float], ...]] = []
    for part in _polygon_parts(region):
        cdt = shapely.constrained_delaunay_triangles(part)
        for tri in cdt.geoms:
            coords = list(tri.exterior.coords[:-1])
            if len(coords) != 3:
                continue
            (x0, y0), (x1, y1), (x2, y2) = coords
            area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
            if abs(area2) <= 2 * AREA_EPS:
                continue
            if area2 < 0:
                coords.reverse()
            triangles.append(tuple((c[0], c[1]) for c in coords))
    return triangles


def prism_mesh(region, z0: float, z1: float) -> Mesh:
    """Closed shell of region x [z0, z1].

    Caps are CDT triangulations (bottom facing -z, top facing +z); walls are
    quads along each boundary ring, wound outward.
    """
    if z1 <= z0:
        raise GeometryError(f"bad prism interval [{z0}, {z1}]")
    b = MeshBuilder()
    for part in _polygon_parts(region):
        tris = triangulate_region(part)
        for (p0, p1, p2) in tris:
            # bottom cap: reverse CCW so the normal points down
            b.add_triangle((p0[0], p0[1], z0), (p2[0], p2[1], z0), (p1[0], p1[1], z0))
            # top cap: CCW, normal up
            b.add_triangle((p0[0], p0[1], z1), (p1[0], p1[1], z1), (p2[0], p2[1], z1))
        rings = [_ring_coords(part.exterior, ccw=True)]
        rings.extend(_ring_coords(r, ccw=False) for r in part.interiors)
        for ring in rings:
            n = len(ring)
            for i in range(n):
                ax, ay = ring[i]
                bx, by = ring[(i + 1) % n]
                # outward wall: for CCW exterior / CW holes the material is
                # on the left of travel, so right-of-travel faces out
                b.add_triangle((ax, ay, z0), (bx, by, z0), (bx, by, z1))
                b.add_triangle((ax, ay, z0), (bx, by, z1), (ax, ay, z1))
    return b.build()


def slab_stack_mesh(slabs) -> Mesh:
    """Concatenate prisms for (region, z0, z1) slabs, one closed shell each."""
    shells = []
    for region, z0, z1 in slabs:
        if z1 - z0 <= 1e-12:
            continue
        shell = prism_mesh(region, z0, z1)
        if shell.triangle_count:
            shells.append(shell)
    return Mesh.merged(shells)
