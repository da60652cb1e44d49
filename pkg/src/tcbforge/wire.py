"""Structured (JSON-ready) documents mirroring the board model one-to-one.

The HTTP service and the browser editor speak these documents; they carry
exactly the fields of the .tcb text form, so the file stays authoritative.
"""

from __future__ import annotations

from .errors import GeometryError, TcbError
from .geometry import BendLine, FlexZone, Mesh, PlanarOutline, PointGrid, Stackup
from .layout import BoardDesign, Socket, Trace, Via, validate_design


class DocumentError(TcbError, ValueError):
    """A structured document failed validation; carries every message."""

    def __init__(self, messages):
        self.messages = tuple(str(m) for m in messages)
        super().__init__("; ".join(self.messages))


def board_to_doc(board: BoardDesign) -> dict:
    return {
        "name": board.name,
        "outline": [list(p) for p in board.outline.vertices],
        "pitch": board.pitch,
        "margin": board.margin,
        "stackup": list(board.stackup.layer_heights),
        "traces": [{
            "id": t.id, "layer": t.layer, "width": t.width, "height": t.height,
            "path": [list(p) for p in t.path],
        } for t in board.traces],
        "vias": [{"id": v.id, "at": list(v.at), "radius": v.radius}
                 for v in board.vias],
        "sockets": [{"id": s.id, "layer": s.layer, "at": list(s.at),
                     "radius": s.radius, "depth": s.depth}
                    for s in board.sockets],
        "bends": [{"id": b.id, "start": list(b.start), "end": list(b.end),
                   "angle_deg": b.angle_deg, "radius": b.radius,
                   "sequence": b.sequence_index} for b in board.bends],
        "flex_zones": [{"id": z.id, "center": list(z.center), "radius": z.radius,
                        "expected_deflection_deg": z.expected_deflection_deg,
                        "direction_deg": z.direction_deg}
                       for z in board.flex_zones],
    }


def _require(doc: dict, key: str, messages: list):
    if key not in doc:
        messages.append(f"missing field {key!r}")
        return None
    return doc[key]


def trace_from_doc(doc: dict) -> Trace:
    return Trace(id=str(doc["id"]), layer=str(doc["layer"]),
                 path=tuple((int(u), int(v)) for u, v in doc["path"]),
                 width=float(doc.get("width", 1.0)),
                 height=float(doc.get("height", 0.3)))


def via_from_doc(doc: dict) -> Via:
    u, v = doc["at"]
    return Via(id=str(doc["id"]), at=(int(u), int(v)),
               radius=float(doc.get("radius", 0.6)))


def socket_from_doc(doc: dict) -> Socket:
    u, v = doc["at"]
    return Socket(id=str(doc["id"]), layer=str(doc["layer"]), at=(int(u), int(v)),
                  radius=float(doc.get("radius", 1.0)),
                  depth=float(doc.get("depth", 2.0)))


def bend_from_doc(doc: dict) -> BendLine:
    return BendLine(id=str(doc["id"]),
                    start=tuple(float(x) for x in doc["start"]),
                    end=tuple(float(x) for x in doc["end"]),
                    angle_deg=float(doc["angle_deg"]),
                    radius=float(doc.get("radius", 3.0)),
                    sequence_index=int(doc.get("sequence", 0)))


def flex_zone_from_doc(doc: dict) -> FlexZone:
    direction = doc.get("direction_deg")
    return FlexZone(id=str(doc["id"]),
                    center=tuple(float(x) for x in doc["center"]),
                    radius=float(doc["radius"]),
                    expected_deflection_deg=float(doc["expected_deflection_deg"]),
                    direction_deg=None if direction is None else float(direction))


def board_from_doc(doc: dict) -> BoardDesign:
    """Build and structurally validate a board from a document. Raises
    DocumentError with every problem found."""
    messages: list[str] = []
    if not isinstance(doc, dict):
        raise DocumentError(["design document must be an object"])
    outline = None
    stackup = None
    try:
        outline = PlanarOutline([(float(x), float(y))
                                 for x, y in _require(doc, "outline", messages) or []])
    except (GeometryError, TypeError, ValueError) as exc:
        messages.append(f"outline: {exc}")
    try:
        stackup = Stackup([float(h) for h in _require(doc, "stackup", messages) or []])
    except (GeometryError, TypeError, ValueError) as exc:
        messages.append(f"stackup: {exc}")

    elements = {"traces": [], "vias": [], "sockets": [], "bends": [], "flex_zones": []}
    parsers = {"traces": trace_from_doc, "vias": via_from_doc,
               "sockets": socket_from_doc, "bends": bend_from_doc,
               "flex_zones": flex_zone_from_doc}
    for kind, parser in parsers.items():
        for entry in doc.get(kind, []):
            try:
                elements[kind].append(parser(entry))
            except (GeometryError, KeyError, TypeError, ValueError, IndexError) as exc:
                messages.append(f"{kind}: {exc!s} in {entry!r}")

    if messages or outline is None or stackup is None:
        raise DocumentError(messages)
    try:
        board = BoardDesign(
            name=str(doc.get("name", "board")),
            outline=outline, stackup=stackup,
            pitch=float(doc.get("pitch", 0)),
            margin=float(doc.get("margin", 0.0)),
            traces=tuple(elements["traces"]),
            vias=tuple(elements["vias"]),
            sockets=tuple(elements["sockets"]),
            bends=tuple(elements["bends"]),
            flex_zones=tuple(elements["flex_zones"]),
        )
    except (GeometryError, ValueError) as exc:
        raise DocumentError([str(exc)]) from exc
    structural = validate_design(board)
    if structural:
        raise DocumentError([str(s) for s in structural])
    return board


def grid_to_doc(grid: PointGrid) -> dict:
    return {"pitch": grid.pitch, "margin": grid.margin,
            "points": [{"u": p.u, "v": p.v, "x": p.x, "y": p.y}
                       for p in grid.points]}


def mesh_to_doc(mesh: Mesh) -> dict:
    return {"vertices": [float(x) for x in mesh.vertices.reshape(-1)],
            "triangles": [int(i) for i in mesh.triangles.reshape(-1)],
            "triangle_count": mesh.triangle_count,
            "warnings": list(mesh.warnings)}
