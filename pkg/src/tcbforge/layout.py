"""The logical circuit board: traces, vias, sockets, nets and structural
validation on top of the planar geometry.

Conductors live on the two outer print layers only; the mid layers always
insulate. Electrical connection requires exact grid-point coincidence.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import EmptyGridError, GeometryError
from .geometry import (
    BendLine,
    FlexZone,
    PlanarOutline,
    PointGrid,
    Stackup,
    generate_point_grid,
    segments_intersect,
)

LAYERS = ("top", "bottom")

DEFAULT_TRACE_WIDTH = 1.0
DEFAULT_TRACE_HEIGHT = 0.3
DEFAULT_VIA_RADIUS = 0.6
DEFAULT_SOCKET_RADIUS = 1.0
DEFAULT_SOCKET_DEPTH = 2.0

# Fabrication geometry shared by solid generation and clearance checks:
# via barrels keep an open core so plating solution wets the hole; socket
# linings are one conductive wall around the pin bore.
VIA_BORE_RADIUS = 0.3
SOCKET_WALL = 0.6

GridIndex = tuple[int, int]


def _check_layer(kind: str, element_id: str, layer: str) -> None:
    if layer not in LAYERS:
        raise GeometryError(f"{kind} {element_id!r}: layer must be one of "
                            f"{LAYERS}, got {layer!r}")


@dataclass(frozen=True)
class Trace:
    """Layer-bound polyline on the pitch grid with rectangular cross-section."""

    id: str
    layer: str
    path: tuple[GridIndex, ...]
    width: float = DEFAULT_TRACE_WIDTH
    height: float = DEFAULT_TRACE_HEIGHT

    def __post_init__(self) -> None:
        _check_layer("trace", self.id, self.layer)
        path = tuple((int(u), int(v)) for u, v in self.path)
        object.__setattr__(self, "path", path)
        if len(path) < 2:
            raise GeometryError(f"trace {self.id!r}: path needs at least 2 points")
        for a, b in zip(path, path[1:]):
            if a == b:
                raise GeometryError(f"trace {self.id!r}: repeated consecutive point {a}")
        if self.width <= 0:
            raise GeometryError(f"trace {self.id!r}: width must be positive")
        if self.height <= 0:
            raise GeometryError(f"trace {self.id!r}: height must be positive")


@dataclass(frozen=True)
class Via:
    """Conductive through-hole joining the top and bottom conductor layers."""

    id: str
    at: GridIndex
    radius: float = DEFAULT_VIA_RADIUS

    def __post_init__(self) -> None:
        object.__setattr__(self, "at", (int(self.at[0]), int(self.at[1])))
        if self.radius <= 0:
            raise GeometryError(f"via {self.id!r}: radius must be positive")


@dataclass(frozen=True)
class Socket:
    """Printed cylindrical receptacle for a press-fit header pin."""

    id: str
    layer: str
    at: GridIndex
    radius: float = DEFAULT_SOCKET_RADIUS
    depth: float = DEFAULT_SOCKET_DEPTH

    def __post_init__(self) -> None:
        _check_layer("socket", self.id, self.layer)
        object.__setattr__(self, "at", (int(self.at[0]), int(self.at[1])))
        if self.radius <= 0:
            raise GeometryError(f"socket {self.id!r}: radius must be positive")
        if self.depth <= 0:
            raise GeometryError(f"socket {self.id!r}: depth must be positive")


@dataclass(frozen=True)
class Net:
    """Maximal electrically connected set of traces and vias."""

    id: str
    members: frozenset[str]


@dataclass(frozen=True)
class BoardDesign:
    """Complete board description.

    Element lists are normalized to id order on construction: ids are the
    identity of elements, so designs differing only in authoring order are
    equal and serialize identically.
    """

    name: str
    outline: PlanarOutline
    stackup: Stackup
    pitch: float
    margin: float = 0.0
    traces: tuple[Trace, ...] = ()
    vias: tuple[Via, ...] = ()
    sockets: tuple[Socket, ...] = ()
    bends: tuple[BendLine, ...] = ()
    flex_zones: tuple[FlexZone, ...] = ()

    def __post_init__(self) -> None:
        for name in ("traces", "vias", "sockets", "bends", "flex_zones"):
            elements = tuple(sorted(getattr(self, name), key=lambda e: e.id))
            object.__setattr__(self, name, elements)
        if self.pitch <= 0:
            raise GeometryError(f"pitch must be positive, got {self.pitch}")
        if self.margin < 0:
            raise GeometryError(f"margin must be non-negative, got {self.margin}")

    @cached_property
    def grid(self) -> PointGrid:
        return generate_point_grid(self.outline, self.pitch, self.margin)

    @property
    def depth(self) -> float:
        return self.stackup.total_depth

    def element_ids(self) -> list[str]:
        ids = [t.id for t in self.traces]
        ids += [v.id for v in self.vias]
        ids += [s.id for s in self.sockets]
        ids += [b.id for b in self.bends]
        ids += [z.id for z in self.flex_zones]
        return ids

    def trace_by_id(self, trace_id: str) -> Trace | None:
        for t in self.traces:
            if t.id == trace_id:
                return t
        return None

    def replace(self, **changes) -> "BoardDesign":
        from dataclasses import replace as _replace
        return _replace(self, **changes)


@dataclass(frozen=True)
class StructuralError:
    """A violated board invariant. kind/element locate it for the DSL's
    source re-spanning and for the HTTP error bodies."""

    kind: str
    element_id: str
    message: str

    def __str__(self) -> str:
        where = f" ({self.kind} {self.element_id!r})" if self.element_id else ""
        return f"{self.message}{where}"


def validate_design(board: BoardDesign) -> list[StructuralError]:
    """Every violation of the board's structural invariants; empty when
    structurally sound. Rule-level checks (widths, clearances) live in drc."""
    errors: list[StructuralError] = []

    seen: dict[str, str] = {}
    for kind, elements in (("trace", board.traces), ("via", board.vias),
                           ("socket", board.sockets), ("bend", board.bends),
                           ("flexzone", board.flex_zones)):
        for e in elements:
            if e.id in seen:
                errors.append(StructuralError(kind, e.id,
                              f"duplicate id {e.id!r} (already used by a {seen[e.id]})"))
            else:
                seen[e.id] = kind

    if not board.stackup.heights_in_range():
        errors.append(StructuralError("board", "",
                      "stackup layer heights must be within [0.1, 1.0] mm, got "
                      f"{board.stackup.layer_heights}"))

    try:
        grid = board.grid
    except EmptyGridError as exc:
        errors.append(StructuralError("board", "", str(exc)))
        return errors

    def on_grid(index: GridIndex) -> bool:
        return index in grid

    for t in board.traces:
        off = [i for i in t.path if not on_grid(i)]
        if off:
            errors.append(StructuralError("trace", t.id,
                          f"trace {t.id!r} references off-grid point(s) {off}"))
            continue
        face = (board.stackup.top_layer_height if t.layer == "top"
                else board.stackup.bottom_layer_height)
        if t.height > face + 1e-9:
            errors.append(StructuralError("trace", t.id,
                          f"trace {t.id!r} height {t.height:g} exceeds its "
                          f"{t.layer} layer height {face:g}; it would cut into "
                          "the insulating mid layers"))
        for a, b in zip(t.path, t.path[1:]):
            if not _segment_inside(board.outline, grid.position_of(a),
                                   grid.position_of(b)):
                errors.append(StructuralError("trace", t.id,
                              f"trace {t.id!r} segment {a}->{b} leaves the outline"))

    occupied: dict[GridIndex, str] = {}
    for v in board.vias:
        if not on_grid(v.at):
            errors.append(StructuralError("via", v.id,
                          f"via {v.id!r} is off-grid at {v.at}"))
            continue
        if v.at in occupied:
            errors.append(StructuralError("via", v.id,
                          f"vias {occupied[v.at]!r} and {v.id!r} share grid point {v.at}"))
        else:
            occupied[v.at] = v.id
        if v.radius <= VIA_BORE_RADIUS:
            errors.append(StructuralError("via", v.id,
                          f"via {v.id!r} radius {v.radius:g} must exceed the "
                          f"{VIA_BORE_RADIUS:g} mm plating bore"))

    for s in board.sockets:
        if not on_grid(s.at):
            errors.append(StructuralError("socket", s.id,
                          f"socket {s.id!r} is off-grid at {s.at}"))

    depth = board.depth
    for b in board.bends:
        if b.radius + 1e-9 < depth:
            errors.append(StructuralError("bend", b.id,
                          f"bend {b.id!r} radius {b.radius:g} is below the board "
                          f"depth {depth:g}"))
        for p in (b.start, b.end):
            if board.outline.contains(p):
                errors.append(StructuralError("bend", b.id,
                              f"bend {b.id!r} axis endpoint {p} lies inside the "
                              "outline; folds must span the full board"))
                break
    for i in range(len(board.bends)):
        for j in range(i + 1, len(board.bends)):
            a, b = board.bends[i], board.bends[j]
            hit = segments_intersect(a.start, a.end, b.start, b.end)
            if hit is not None and board.outline.contains(hit):
                errors.append(StructuralError("bend", b.id,
                              f"bend axes {a.id!r} and {b.id!r} cross inside the "
                              f"outline at ({hit[0]:.3f}, {hit[1]:.3f})"))

    return errors


def _segment_inside(outline: PlanarOutline, a, b) -> bool:
    """True when segment ab stays inside the outline. Both endpoints are
    interior grid points, so any boundary crossing (even grazing an outline
    vertex) counts as leaving."""
    for c, d in outline.segments():
        if segments_intersect(a, b, c, d) is not None:
            return False
    mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    return outline.contains_or_boundary(mid)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def add(self, x: str) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def derive_nets(board: BoardDesign) -> list[Net]:
    """Partition of the conductive elements (traces and vias) into nets.

    Traces sharing a grid point on the same layer connect; a via connects
    the coincident top and bottom points. Deterministic: nets are ordered by
    their smallest member id and numbered n1, n2, ...
    """
    uf = _UnionFind()
    point_owner: dict[tuple[str, GridIndex], str] = {}

    for t in sorted(board.traces, key=lambda t: t.id):
        uf.add(t.id)
        for p in t.path:
            key = (t.layer, p)
            if key in point_owner:
                uf.union(point_owner[key], t.id)
            else:
                point_owner[key] = t.id
    for v in sorted(board.vias, key=lambda v: v.id):
        uf.add(v.id)
        for layer in LAYERS:
            key = (layer, v.at)
            if key in point_owner:
                uf.union(point_owner[key], v.id)
            else:
                point_owner[key] = v.id

    groups: dict[str, set[str]] = {}
    for member in uf.parent:
        groups.setdefault(uf.find(member), set()).add(member)
    ordered = sorted(groups.values(), key=lambda g: min(g))
    return [Net(id=f"n{i + 1}", members=frozenset(g))
            for i, g in enumerate(ordered)]


def net_of_elements(board: BoardDesign) -> dict[str, str]:
    """Element id -> net id for every trace and via."""
    mapping: dict[str, str] = {}
    for net in derive_nets(board):
        for member in net.members:
            mapping[member] = net.id
    return mapping


def trace_length(trace: Trace, board: BoardDesign) -> float:
    """Euclidean length of the flat path. Folding is isometric, so this is
    also the formed length."""
    grid = board.grid
    pts = [grid.position_of(p) for p in trace.path]
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += ((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) ** 0.5
    return total


def trace_positions(trace: Trace, board: BoardDesign) -> list[tuple[float, float]]:
    grid = board.grid
    return [grid.position_of(p) for p in trace.path]
