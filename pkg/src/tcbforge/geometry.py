"""Planar outlines, pitch grids, bend/strain math and triangle meshes.

Everything is in millimeters and degrees. All types are immutable values;
operations are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import EmptyGridError, GeometryError

Point2 = tuple[float, float]

# Coordinate tolerance used for point identity, boundary tests and watertight
# checks. Far below the 0.4 mm nozzle resolution of the target process.
TOL = 1e-9


# ---------------------------------------------------------------------------
# small 2D helpers
# ---------------------------------------------------------------------------

def _sub(a: Point2, b: Point2) -> Point2:
    return (a[0] - b[0], a[1] - b[1])


def _cross(a: Point2, b: Point2) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _dot(a: Point2, b: Point2) -> float:
    return a[0] * b[0] + a[1] * b[1]


def _norm(a: Point2) -> float:
    return math.hypot(a[0], a[1])


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    """Distance from point p to segment ab."""
    ab = _sub(b, a)
    ap = _sub(p, a)
    denom = _dot(ab, ab)
    if denom <= 0.0:
        return _norm(ap)
    t = max(0.0, min(1.0, _dot(ap, ab) / denom))
    closest = (a[0] + t * ab[0], a[1] + t * ab[1])
    return _norm(_sub(p, closest))


def segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2,
                       tol: float = TOL) -> Point2 | None:
    """Intersection point of segments ab and cd, or None.

    Collinear overlapping segments return None: they share a line rather
    than crossing it, which is the distinction fold axes care about.
    """
    r = _sub(b, a)
    s = _sub(d, c)
    denom = _cross(r, s)
    if abs(denom) <= tol * (_norm(r) * _norm(s) + tol):
        return None
    t = _cross(_sub(c, a), s) / denom
    u = _cross(_sub(c, a), r) / denom
    if -tol <= t <= 1 + tol and -tol <= u <= 1 + tol:
        return (a[0] + t * r[0], a[1] + t * r[1])
    return None


def segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> float:
    """Minimum distance between segments ab and cd."""
    if segments_intersect(a, b, c, d) is not None:
        return 0.0
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )


# ---------------------------------------------------------------------------
# planar outline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanarOutline:
    """Closed simple polygon describing the flat, as-printed board shape.

    Vertices are normalized to counter-clockwise order on construction.
    """

    vertices: tuple[Point2, ...]

    def __init__(self, vertices) -> None:
        verts = tuple((float(x), float(y)) for x, y in vertices)
        if len(verts) < 3:
            raise GeometryError(f"outline needs at least 3 vertices, got {len(verts)}")
        area2 = _signed_area2(verts)
        if abs(area2) <= TOL:
            raise GeometryError("outline has zero area")
        if area2 < 0:
            verts = tuple(reversed(verts))
        if _self_intersects(verts):
            raise GeometryError("outline is self-intersecting")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def rectangle(cls, width: float, height: float) -> "PlanarOutline":
        if width <= 0 or height <= 0:
            raise GeometryError("rectangle sides must be positive")
        return cls([(0.0, 0.0), (width, 0.0), (width, height), (0.0, height)])

    def is_rectangle(self) -> tuple[float, float] | None:
        """(width, height) when the outline is exactly the canonical
        axis-aligned rectangle anchored at the origin, else None."""
        v = self.vertices
        if len(v) != 4:
            return None
        w, h = v[2][0], v[2][1]
        if v == ((0.0, 0.0), (w, 0.0), (w, h), (0.0, h)) and w > 0 and h > 0:
            return (w, h)
        return None

    @property
    def area(self) -> float:
        return _signed_area2(self.vertices) / 2.0

    @property
    def bounding_box(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def segments(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def distance_to_boundary(self, p: Point2) -> float:
        return min(point_segment_distance(p, a, b) for a, b in self.segments())

    def contains(self, p: Point2) -> bool:
        """Strict interior test. Points on the boundary are outside."""
        if self.distance_to_boundary(p) <= TOL:
            return False
        return self._winding_inside(p)

    def contains_or_boundary(self, p: Point2, tol: float = TOL) -> bool:
        if self.distance_to_boundary(p) <= tol:
            return True
        return self._winding_inside(p)

    def _winding_inside(self, p: Point2) -> bool:
        # Crossing-number ray cast (positive x direction).
        x, y = p
        inside = False
        v = self.vertices
        j = len(v) - 1
        for i in range(len(v)):
            xi, yi = v[i]
            xj, yj = v[j]
            if (yi > y) != (yj > y):
                x_cross = (xj - xi) * (y - yi) / (yj - yi) + xi
                if x < x_cross:
                    inside = not inside
            j = i
        return inside


def _signed_area2(verts: tuple[Point2, ...]) -> float:
    total = 0.0
    n = len(verts)
    for i in range(n):
        j = (i + 1) % n
        total += verts[i][0] * verts[j][1] - verts[j][0] * verts[i][1]
    return total


def _self_intersects(verts: tuple[Point2, ...]) -> bool:
    n = len(verts)
    segs = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            a, b = segs[i]
            c, d = segs[j]
            hit = segments_intersect(a, b, c, d)
            if hit is None:
                continue
            if adjacent:
                # Sharing the common endpoint is fine; anything else is a pinch.
                shared = b if j == i + 1 else a
                if _norm(_sub(hit, shared)) > 1e-7:
                    return True
            else:
                return True
    return False


# ---------------------------------------------------------------------------
# pitch grid
# ---------------------------------------------------------------------------

DEFAULT_PITCH = 2.54  # header/pin pitch for through-hole packages


@dataclass(frozen=True)
class GridPoint:
    u: int
    v: int
    x: float
    y: float

    @property
    def index(self) -> tuple[int, int]:
        return (self.u, self.v)

    @property
    def position(self) -> Point2:
        return (self.x, self.y)


@dataclass(frozen=True)
class PointGrid:
    """Routable lattice inside the outline inset by ``margin``.

    Points are ordered row-major (increasing v, then u). Horizontal and
    vertical neighbors are exactly ``pitch`` apart.
    """

    pitch: float
    margin: float
    points: tuple[GridPoint, ...]

    @cached_property
    def _by_index(self) -> dict[tuple[int, int], GridPoint]:
        return {p.index: p for p in self.points}

    def __contains__(self, index: tuple[int, int]) -> bool:
        return tuple(index) in self._by_index

    def position_of(self, index: tuple[int, int]) -> Point2:
        try:
            return self._by_index[tuple(index)].position
        except KeyError:
            raise KeyError(f"grid index {tuple(index)} is not on the grid") from None

    def __len__(self) -> int:
        return len(self.points)


def generate_point_grid(outline: PlanarOutline, pitch: float,
                        margin: float = 0.0) -> PointGrid:
    """All lattice points (u*pitch, v*pitch), anchored at the outline's
    bounding-box minimum corner plus margin, that fall inside the outline
    inset by margin.

    A point qualifies when it is strictly inside the outline and its distance
    to the boundary is at least ``margin`` (to within 1e-9 mm slack, so the
    inset boundary itself is included).
    """
    if pitch <= 0:
        raise GeometryError(f"pitch must be positive, got {pitch}")
    if margin < 0:
        raise GeometryError(f"margin must be non-negative, got {margin}")
    minx, miny, maxx, maxy = outline.bounding_box
    ox, oy = minx + margin, miny + margin
    points: list[GridPoint] = []
    nv = int(math.floor((maxy - margin - oy) / pitch + TOL))
    nu = int(math.floor((maxx - margin - ox) / pitch + TOL))
    for v in range(nv + 1):
        y = oy + v * pitch
        for u in range(nu + 1):
            x = ox + u * pitch
            p = (x, y)
            if not outline._winding_inside(p):
                continue
            d = outline.distance_to_boundary(p)
            if d <= TOL:
                continue
            if d + TOL < margin:
                continue
            points.append(GridPoint(u, v, x, y))
    if not points:
        raise EmptyGridError(
            f"no grid points fit: pitch {pitch} mm with margin {margin} mm "
            f"inside a {maxx - minx:g}x{maxy - miny:g} mm outline")
    return PointGrid(pitch=pitch, margin=margin, points=tuple(points))


# ---------------------------------------------------------------------------
# stackup, bends, flex zones
# ---------------------------------------------------------------------------

MIN_LAYER_HEIGHT = 0.1
MAX_LAYER_HEIGHT = 1.0


@dataclass(frozen=True)
class Stackup:
    """Four print layers: top conductor-bearing, two insulating mids,
    bottom conductor-bearing. Heights in mm, top first."""

    layer_heights: tuple[float, float, float, float]

    def __init__(self, layer_heights) -> None:
        heights = tuple(float(h) for h in layer_heights)
        if len(heights) != 4:
            raise GeometryError(f"stackup needs exactly 4 layers, got {len(heights)}")
        if any(h <= 0 for h in heights):
            raise GeometryError("stackup layer heights must be positive")
        object.__setattr__(self, "layer_heights", heights)

    @property
    def total_depth(self) -> float:
        return sum(self.layer_heights)

    @property
    def top_layer_height(self) -> float:
        return self.layer_heights[0]

    @property
    def bottom_layer_height(self) -> float:
        return self.layer_heights[3]

    def heights_in_range(self) -> bool:
        return all(MIN_LAYER_HEIGHT <= h <= MAX_LAYER_HEIGHT
                   for h in self.layer_heights)


DEFAULT_STACKUP = Stackup((0.3, 0.3, 0.3, 0.3))
DEFAULT_BEND_RADIUS = 3.0


@dataclass(frozen=True)
class BendLine:
    """Full-width fold of the flat board about a straight axis.

    angle_deg is signed: positive folds the moving side toward +z. The bend
    consumes a material band of arc length radius*|angle| centered on the
    axis. sequence_index is the physical bending order.
    """

    id: str
    start: Point2
    end: Point2
    angle_deg: float
    radius: float = DEFAULT_BEND_RADIUS
    sequence_index: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", (float(self.end[0]), float(self.end[1])))
        if _norm(_sub(self.end, self.start)) <= TOL:
            raise GeometryError(f"bend {self.id!r}: axis endpoints coincide")
        if not -180.0 <= self.angle_deg <= 180.0:
            raise GeometryError(f"bend {self.id!r}: angle must be in [-180, 180]")
        if self.radius <= 0:
            raise GeometryError(f"bend {self.id!r}: radius must be positive")

    @property
    def direction(self) -> Point2:
        d = _sub(self.end, self.start)
        n = _norm(d)
        return (d[0] / n, d[1] / n)

    @property
    def arc_length(self) -> float:
        return self.radius * abs(math.radians(self.angle_deg))


@dataclass(frozen=True)
class FlexZone:
    """Disc-shaped region expected to see repeated deflection in service.

    direction_deg, when given, is the in-plane direction of the deflection
    motion (the curvature direction, perpendicular to the implied fold axis).
    """

    id: str
    center: Point2
    radius: float
    expected_deflection_deg: float
    direction_deg: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if self.radius <= 0:
            raise GeometryError(f"flex zone {self.id!r}: radius must be positive")
        if self.expected_deflection_deg < 0:
            raise GeometryError(f"flex zone {self.id!r}: expected deflection must be >= 0")


# ---------------------------------------------------------------------------
# strain / deflection math
# ---------------------------------------------------------------------------

def flexural_strain(deflection_mm: float, depth_mm: float, span_mm: float) -> float:
    """Outer-fiber strain of a 3-point bend: 6*D*d / L^2."""
    if span_mm <= 0:
        raise GeometryError(f"span must be positive, got {span_mm}")
    if depth_mm <= 0:
        raise GeometryError(f"depth must be positive, got {depth_mm}")
    if deflection_mm < 0:
        raise GeometryError(f"deflection must be >= 0, got {deflection_mm}")
    return 6.0 * deflection_mm * depth_mm / (span_mm * span_mm)


def deflection_angle(deflection_mm: float, span_mm: float) -> float:
    """Deviation from flat, in degrees, of a 3-point bend with center
    deflection D over span L: 2*atan(2D/L).

    180 degrees minus this value is the obtuse angle between the two halves.
    """
    if span_mm <= 0:
        raise GeometryError(f"span must be positive, got {span_mm}")
    if deflection_mm < 0:
        raise GeometryError(f"deflection must be >= 0, got {deflection_mm}")
    return math.degrees(2.0 * math.atan2(2.0 * deflection_mm, span_mm))


def deflection_for_angle(angle_deg: float, span_mm: float) -> float:
    """Inverse of deflection_angle: center deflection producing the given
    deviation from flat."""
    if span_mm <= 0:
        raise GeometryError(f"span must be positive, got {span_mm}")
    if not 0 <= angle_deg < 180:
        raise GeometryError(f"angle must be in [0, 180), got {angle_deg}")
    return 0.5 * span_mm * math.tan(math.radians(angle_deg) / 2.0)


def bend_surface_strain(total_depth_mm: float, bend_radius_mm: float) -> float:
    """Outer-fiber strain t/(2r) of folding a board of the given depth about
    a cylinder of the given radius. Thermoform feasibility heuristic only;
    plating happens after bending."""
    if total_depth_mm <= 0:
        raise GeometryError(f"depth must be positive, got {total_depth_mm}")
    if bend_radius_mm <= 0:
        raise GeometryError(f"radius must be positive, got {bend_radius_mm}")
    return total_depth_mm / (2.0 * bend_radius_mm)


# ---------------------------------------------------------------------------
# triangle meshes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mesh:
    """Indexed triangle set. Vertices are (n,3) float64, triangles (m,3)
    int64 referencing vertices with counter-clockwise (outward) winding."""

    vertices: np.ndarray
    triangles: np.ndarray
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if len(t) and (t.min() < 0 or t.max() >= len(v)):
            raise GeometryError("triangle index out of range")

    @classmethod
    def empty(cls) -> "Mesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mesh):
            return NotImplemented
        return (self.vertices.shape == other.vertices.shape
                and self.triangles.shape == other.triangles.shape
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.triangles, other.triangles))

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def triangle_points(self) -> np.ndarray:
        """(m, 3, 3) array of triangle corner positions."""
        return self.vertices[self.triangles]

    def face_normals(self) -> np.ndarray:
        p = self.triangle_points()
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        lengths = np.linalg.norm(n, axis=1, keepdims=True)
        lengths[lengths == 0] = 1.0
        return n / lengths

    def face_areas(self) -> np.ndarray:
        p = self.triangle_points()
        return 0.5 * np.linalg.norm(
            np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    def volume(self) -> float:
        """Signed volume by summed tetrahedra; exact for closed, consistently
        wound shells (internal coincident faces cancel)."""
        p = self.triangle_points()
        return float(np.einsum("ij,ij->i", p[:, 0],
                               np.cross(p[:, 1], p[:, 2])).sum() / 6.0)

    def edge_census(self) -> dict[tuple[int, int], int]:
        census: dict[tuple[int, int], int] = {}
        for a, b, c in self.triangles:
            for i, j in ((a, b), (b, c), (c, a)):
                key = (int(min(i, j)), int(max(i, j)))
                census[key] = census.get(key, 0) + 1
        return census

    def open_edges(self) -> list[tuple[int, int]]:
        return sorted(k for k, n in self.edge_census().items() if n != 2)

    def is_watertight(self) -> bool:
        """Every edge shared by exactly two triangles, with opposite
        directed orientations."""
        directed: dict[tuple[int, int], int] = {}
        for a, b, c in self.triangles:
            for i, j in ((a, b), (b, c), (c, a)):
                key = (int(i), int(j))
                directed[key] = directed.get(key, 0) + 1
        if not directed:
            return True
        for (i, j), n in directed.items():
            if n != 1 or directed.get((j, i), 0) != 1:
                return False
        return True

    def has_degenerate_triangles(self, tol: float = TOL) -> bool:
        if not len(self.triangles):
            return False
        return bool((self.face_areas() <= tol).any())

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if not len(self.vertices):
            z = np.zeros(3)
            return z, z
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def translated(self, offset) -> "Mesh":
        return Mesh(self.vertices + np.asarray(offset, dtype=np.float64),
                    self.triangles.copy(), self.warnings)

    @classmethod
    def merged(cls, meshes) -> "Mesh":
        """Concatenate shells. Vertices are not deduplicated across inputs,
        so closed inputs stay closed."""
        meshes = [m for m in meshes if m.triangle_count or m.vertex_count]
        if not meshes:
            return cls.empty()
        verts = []
        tris = []
        warnings: list[str] = []
        offset = 0
        for m in meshes:
            verts.append(m.vertices)
            tris.append(m.triangles + offset)
            offset += m.vertex_count
            warnings.extend(m.warnings)
        return cls(np.vstack(verts), np.vstack(tris), tuple(warnings))


class MeshBuilder:
    """Accumulates triangles, deduplicating vertices by rounded position."""

    def __init__(self, quantum: float = TOL):
        self._quantum = quantum
        self._index: dict[tuple[int, int, int], int] = {}
        self._vertices: list[tuple[float, float, float]] = []
        self._triangles: list[tuple[int, int, int]] = []

    def vertex(self, x: float, y: float, z: float) -> int:
        key = (round(x / self._quantum), round(y / self._quantum),
               round(z / self._quantum))
        idx = self._index.get(key)
        if idx is None:
            idx = len(self._vertices)
            self._index[key] = idx
            self._vertices.append((float(x), float(y), float(z)))
        return idx

    def add_triangle(self, p0, p1, p2) -> None:
        i0 = self.vertex(*p0)
        i1 = self.vertex(*p1)
        i2 = self.vertex(*p2)
        if i0 == i1 or i1 == i2 or i2 == i0:
            return
        self._triangles.append((i0, i1, i2))

    def build(self) -> Mesh:
        if not self._triangles:
            return Mesh.empty()
        return Mesh(np.array(self._vertices), np.array(self._triangles))
