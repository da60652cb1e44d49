"""Printable solids: substrate and conductor meshes for a validated board.

The board decomposes into z-slabs with 2D cross-sections. Trace channels are
recessed flush into the outer faces (the substrate is trimmed by exactly the
conductor footprints, zero clearance); via barrels run through all four
layers around an open bore so plating solution can wet them; socket linings
are one conductive wall around the pin bore, extending as a boss where the
socket is deeper than the board.

Geometry is flat, as printed. Bends are applied by the fold preview, never
here.
"""

from __future__ import annotations

from dataclasses import dataclass

from shapely.geometry import LineString, Polygon
from shapely.ops import unary_union

from .drc import DrcConfig, check_geometry
from .errors import SolidsError
from .geometry import Mesh
from .layout import (
    SOCKET_WALL,
    VIA_BORE_RADIUS,
    BoardDesign,
    net_of_elements,
    trace_positions,
    validate_design,
)
from .meshing import AREA_EPS, circle_polygon, slab_stack_mesh

_Z_EPS = 1e-9


@dataclass(frozen=True)
class SolidSet:
    """The two meshes a slicer consumes: insulator volume and conductor
    volume. Interiors are disjoint; both shells are watertight."""

    substrate: Mesh
    conductor: Mesh


@dataclass(frozen=True)
class _Piece:
    footprint: Polygon
    z0: float
    z1: float

    def covers(self, a: float, b: float) -> bool:
        return self.z0 <= a + _Z_EPS and self.z1 >= b - _Z_EPS


def trace_footprint(trace, board: BoardDesign) -> Polygon:
    """Stroked path: rectangular cross-section, flat ends, mitred (square)
    corners at grid turns."""
    line = LineString(trace_positions(trace, board))
    return line.buffer(trace.width / 2.0, cap_style="flat", join_style="mitre",
                       mitre_limit=8.0)


def _socket_extent(socket, depth_board: float) -> tuple[float, float]:
    """(z_bot, z_top) of the socket bore/lining; the boss carries any depth
    beyond the board."""
    boss = max(0.0, socket.depth - depth_board)
    if socket.layer == "top":
        z_top = depth_board + boss
        return (z_top - socket.depth, z_top)
    z_bot = -boss
    return (z_bot, z_bot + socket.depth)


def generate_solids(board: BoardDesign, validate: bool = True,
                    segments: int = 32,
                    bend_slices: int | None = None) -> SolidSet:
    """Build the substrate and conductor solids.

    validate=True (the default) refuses boards with structural errors or
    rule-level geometry errors. Overlapping distinct-net conductors are
    always a hard error. Previews may pass validate=False to render
    work-in-progress boards.

    bend_slices, when set, pre-slices every cross-section into that many
    strips across each bend band, so the fold preview can map the mesh onto
    smooth cylinder arcs without any further refinement.
    """
    if validate:
        structural = validate_design(board)
        if structural:
            raise SolidsError("structural errors: " +
                              "; ".join(str(s) for s in structural))
        rule_errors = [f for f in check_geometry(board, DrcConfig())
                       if f.severity == "error"]
        if rule_errors:
            raise SolidsError("rule errors: " +
                              "; ".join(f.message for f in rule_errors))

    outline_poly = Polygon(board.outline.vertices)
    depth = board.depth

    channels: list[tuple[str, str, _Piece]] = []  # (trace id, layer, piece)
    for t in board.traces:
        fp = trace_footprint(t, board)
        stray = fp.difference(outline_poly)
        if stray.area > 1e-6:
            raise SolidsError(f"trace {t.id!r} footprint extends "
                              f"{stray.area:.3f} mm^2 beyond the outline")
        z = (depth - t.height, depth) if t.layer == "top" else (0.0, t.height)
        channels.append((t.id, t.layer, _Piece(fp, *z)))

    nets = net_of_elements(board)
    for i in range(len(channels)):
        for j in range(i + 1, len(channels)):
            id_a, layer_a, piece_a = channels[i]
            id_b, layer_b, piece_b = channels[j]
            if layer_a != layer_b or nets[id_a] == nets[id_b]:
                continue
            overlap = piece_a.footprint.intersection(piece_b.footprint)
            if overlap.area > 1e-9:
                raise SolidsError(
                    f"distinct-net conductors {id_a!r} and {id_b!r} overlap by "
                    f"{overlap.area:.4f} mm^2; the rule checker should have "
                    "caught this")

    barrels: list[_Piece] = []
    bores: list[_Piece] = []
    for v in board.vias:
        if v.radius <= VIA_BORE_RADIUS:
            raise SolidsError(f"via {v.id!r} radius {v.radius:g} leaves no wall "
                              f"around the {VIA_BORE_RADIUS:g} mm bore")
        pos = board.grid.position_of(v.at)
        barrels.append(_Piece(circle_polygon(pos, v.radius, segments), 0.0, depth))
        bores.append(_Piece(circle_polygon(pos, VIA_BORE_RADIUS, segments),
                            0.0, depth))

    linings: list[_Piece] = []
    board_holes: list[_Piece] = []
    for s in board.sockets:
        pos = board.grid.position_of(s.at)
        z_bot, z_top = _socket_extent(s, depth)
        outer = circle_polygon(pos, s.radius + SOCKET_WALL, segments)
        linings.append(_Piece(outer, z_bot, z_top))
        bores.append(_Piece(circle_polygon(pos, s.radius, segments), z_bot, z_top))
        hole_lo, hole_hi = max(z_bot, 0.0), min(z_top, depth)
        if hole_hi - hole_lo > _Z_EPS:
            board_holes.append(_Piece(outer, hole_lo, hole_hi))

    strips = _bend_strips(board, bend_slices) if bend_slices else None

    # -- substrate ----------------------------------------------------------
    cuts = [p for _, _, p in channels] + barrels + board_holes
    breakpoints = {0.0, depth}
    for p in cuts:
        breakpoints.add(min(max(p.z0, 0.0), depth))
        breakpoints.add(min(max(p.z1, 0.0), depth))
    substrate_slabs = []
    for a, b in _intervals(breakpoints):
        active = [p.footprint for p in cuts if p.covers(a, b)]
        region = outline_poly.difference(unary_union(active)) if active else outline_poly
        if region.area > AREA_EPS:
            substrate_slabs.extend((piece, a, b)
                                   for piece in _sliced(region, strips))
    substrate = slab_stack_mesh(substrate_slabs)

    # -- conductor ------------------------------------------------------------
    pieces = [p for _, _, p in channels] + barrels + linings
    breakpoints = set()
    for p in pieces + bores:
        breakpoints.add(p.z0)
        breakpoints.add(p.z1)
    conductor_slabs = []
    for a, b in _intervals(breakpoints) if pieces else ():
        active = [p.footprint for p in pieces if p.covers(a, b)]
        if not active:
            continue
        region = unary_union(active)
        holes = [p.footprint for p in bores if p.covers(a, b)]
        if holes:
            region = region.difference(unary_union(holes))
        if region.area > AREA_EPS:
            conductor_slabs.extend((piece, a, b)
                                   for piece in _sliced(region, strips))
    conductor = slab_stack_mesh(conductor_slabs)

    return SolidSet(substrate=substrate, conductor=conductor)


def _bend_strips(board: BoardDesign, slices: int) -> list[list[Polygon]]:
    """Per bend: the strip rectangles subdividing its band across the
    board's full extent."""
    minx, miny, maxx, maxy = board.outline.bounding_box
    span = ((maxx - minx) ** 2 + (maxy - miny) ** 2) ** 0.5 + 2.0
    all_strips: list[list[Polygon]] = []
    for bend in board.bends:
        arc = bend.arc_length
        if arc <= 0:
            continue
        dx, dy = bend.direction
        nx, ny = -dy, dx
        ax, ay = bend.start
        cx = (minx + maxx) / 2.0 - ax
        cy = (miny + maxy) / 2.0 - ay
        t_mid = cx * dx + cy * dy
        step = arc / slices
        strips = []
        for i in range(slices):
            s0 = -arc / 2.0 + i * step
            s1 = s0 + step
            corners = []
            for s, t in ((s0, t_mid - span), (s1, t_mid - span),
                         (s1, t_mid + span), (s0, t_mid + span)):
                corners.append((ax + s * nx + t * dx, ay + s * ny + t * dy))
            strips.append(Polygon(corners))
        all_strips.append(strips)
    return all_strips


def _sliced(region, strips: list[list[Polygon]] | None):
    """Split a region into pieces along every bend band's strips. Pieces are
    emitted as separate shells, which keeps the stack watertight."""
    if not strips:
        return [region]
    pieces = [region]
    for band in strips:
        band_union = unary_union(band)
        next_pieces = []
        for piece in pieces:
            outside = piece.difference(band_union)
            if outside.area > AREA_EPS:
                next_pieces.append(outside)
            for strip in band:
                inside = piece.intersection(strip)
                if inside.area > AREA_EPS:
                    next_pieces.append(inside)
        pieces = next_pieces
    return pieces


def _intervals(breakpoints):
    zs = sorted(breakpoints)
    merged = [zs[0]]
    for z in zs[1:]:
        if z - merged[-1] > _Z_EPS:
            merged.append(z)
    return list(zip(merged, merged[1:]))
