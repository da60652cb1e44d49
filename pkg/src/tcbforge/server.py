"""Local HTTP service behind the browser editor.

One design document lives in memory; every mutation is validated and
rule-checked before it replaces the current board, and the response carries
the post-mutation rule report so the editor is consistent after a single
round-trip. Reads are safe concurrently; mutations serialize on a lock in
arrival order. Nothing touches the .tcb file until POST /save.
"""

from __future__ import annotations

import json
import mimetypes
import os
import threading
from dataclasses import replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .drc import DrcConfig, run_drc
from .dsl import serialize
from .errors import SolidsError
from .folding import fold_preview, refine_for_bends
from .layout import BoardDesign, derive_nets
from .solids import generate_solids
from .wire import (
    DocumentError,
    bend_from_doc,
    board_from_doc,
    board_to_doc,
    flex_zone_from_doc,
    grid_to_doc,
    mesh_to_doc,
    socket_from_doc,
    trace_from_doc,
    via_from_doc,
)

_ELEMENT_KINDS = {
    "traces": (trace_from_doc, "traces"),
    "vias": (via_from_doc, "vias"),
    "sockets": (socket_from_doc, "sockets"),
    "bends": (bend_from_doc, "bends"),
    "flexzones": (flex_zone_from_doc, "flex_zones"),
    "flex_zones": (flex_zone_from_doc, "flex_zones"),
}


class DesignService:
    """Holds the single in-memory design and applies serialized mutations."""

    def __init__(self, board: BoardDesign, path: str | None = None,
                 cfg: DrcConfig | None = None,
                 currents: dict[str, float] | None = None):
        self.board = board
        self.path = path
        self.cfg = cfg or DrcConfig()
        self.currents = currents or {}
        self.lock = threading.Lock()

    # -- reads ---------------------------------------------------------------
    def design_doc(self) -> dict:
        return board_to_doc(self.board)

    def drc_doc(self, board: BoardDesign | None = None) -> dict:
        board = board if board is not None else self.board
        report = run_drc(board, self.cfg, currents=self.currents or None)
        doc = report.to_dict()
        doc["summary"]["net_count"] = len(derive_nets(board))
        return doc

    def grid_doc(self) -> dict:
        return grid_to_doc(self.board.grid)

    def mesh_doc(self, folded: bool) -> dict:
        board = self.board
        if folded and board.bends:
            solids = generate_solids(board, validate=False, bend_slices=12)
            neutral = board.depth / 2.0
            substrate = fold_preview(solids.substrate, board.bends,
                                     neutral_z=neutral)
            conductor = fold_preview(solids.conductor, board.bends,
                                     neutral_z=neutral,
                                     detect_self_intersections=False)
        else:
            solids = generate_solids(board, validate=False)
            substrate, conductor = solids.substrate, solids.conductor
        warnings = list(substrate.warnings) + list(conductor.warnings)
        return {"folded": bool(folded and board.bends),
                "substrate": mesh_to_doc(substrate),
                "conductor": mesh_to_doc(conductor),
                "warnings": warnings}

    # -- mutations -------------------------------------------------------------
    def replace_design(self, doc: dict) -> dict:
        with self.lock:
            board = board_from_doc(doc)
            self.board = board
            return self._mutation_response()

    def add_element(self, kind: str, doc: dict) -> dict:
        parser, attr = _ELEMENT_KINDS[kind]
        with self.lock:
            element = parser(doc)
            existing = getattr(self.board, attr)
            if any(e.id == element.id for e in existing):
                raise DocumentError([f"id {element.id!r} already exists"])
            board = replace(self.board, **{attr: existing + (element,)})
            from .layout import validate_design
            structural = validate_design(board)
            if structural:
                raise DocumentError([str(s) for s in structural])
            self.board = board
            return self._mutation_response(created=element.id)

    def delete_element(self, kind: str, element_id: str) -> dict:
        if kind not in _ELEMENT_KINDS:
            raise KeyError(kind)
        _, attr = _ELEMENT_KINDS[kind]
        with self.lock:
            existing = getattr(self.board, attr)
            kept = tuple(e for e in existing if e.id != element_id)
            if len(kept) == len(existing):
                raise LookupError(f"no {kind[:-1]} with id {element_id!r}")
            board = replace(self.board, **{attr: kept})
            from .layout import validate_design
            structural = validate_design(board)
            if structural:
                raise DocumentError([str(s) for s in structural])
            self.board = board
            return self._mutation_response(deleted=element_id)

    def save(self) -> dict:
        with self.lock:
            if self.path is None:
                raise DocumentError(["service was started without a file path"])
            text = serialize(self.board)
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            return {"saved": self.path, "bytes": len(text.encode())}

    def _mutation_response(self, **extra) -> dict:
        doc = {"design": self.design_doc(), "drc": self.drc_doc()}
        doc.update(extra)
        return doc


class _Handler(BaseHTTPRequestHandler):
    service: DesignService = None  # set by make_server
    ui_dir: str | None = None
    protocol_version = "HTTP/1.1"

    # -- plumbing -----------------------------------------------------------
    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, payload, status=200) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_errors(self, messages, status=422) -> None:
        self._send_json({"errors": [{"message": m} for m in messages]}, status)

    def _read_json(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise DocumentError(["empty request body"])
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DocumentError([f"malformed JSON: {exc}"]) from exc

    # -- methods ------------------------------------------------------------
    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods",
                         "GET, PUT, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        url = urlparse(self.path)
        route = url.path.rstrip("/") or "/"
        try:
            if route == "/design":
                return self._send_json(self.service.design_doc())
            if route == "/drc":
                return self._send_json(self.service.drc_doc())
            if route == "/grid":
                return self._send_json(self.service.grid_doc())
            if route == "/mesh":
                params = parse_qs(url.query)
                folded = params.get("folded", ["false"])[0].lower() in ("1", "true", "yes")
                return self._send_json(self.service.mesh_doc(folded))
            if route == "/" or route.startswith("/ui"):
                return self._serve_ui(route)
            return self._send_errors([f"unknown route {route!r}"], status=404)
        except SolidsError as exc:
            return self._send_errors([str(exc)], status=422)
        except Exception as exc:  # keep the service alive for the editor
            return self._send_errors([f"internal error: {exc}"], status=500)

    def do_PUT(self):
        route = urlparse(self.path).path.rstrip("/")
        if route != "/design":
            return self._send_errors([f"unknown route {route!r}"], status=404)
        try:
            return self._send_json(self.service.replace_design(self._read_json()))
        except DocumentError as exc:
            return self._send_errors(exc.messages)

    def do_POST(self):
        route = urlparse(self.path).path.rstrip("/")
        if route == "/save":
            try:
                return self._send_json(self.service.save())
            except DocumentError as exc:
                return self._send_errors(exc.messages)
            except OSError as exc:
                return self._send_errors([f"write failed: {exc}"], status=500)
        kind = route.lstrip("/")
        if kind not in ("traces", "vias", "sockets", "bends"):
            return self._send_errors([f"unknown route {route!r}"], status=404)
        try:
            return self._send_json(self.service.add_element(kind, self._read_json()))
        except DocumentError as exc:
            return self._send_errors(exc.messages)
        except (KeyError, TypeError, ValueError) as exc:
            return self._send_errors([f"bad element document: {exc}"], status=422)

    def do_DELETE(self):
        route = urlparse(self.path).path.rstrip("/")
        parts = [p for p in route.split("/") if p]
        if len(parts) != 2:
            return self._send_errors(["expected /{kind}/{id}"], status=404)
        kind, element_id = parts
        try:
            return self._send_json(self.service.delete_element(kind, element_id))
        except KeyError:
            return self._send_errors([f"unknown element kind {kind!r}"], status=404)
        except LookupError as exc:
            return self._send_errors([str(exc)], status=404)
        except DocumentError as exc:
            return self._send_errors(exc.messages)

    # -- static UI ------------------------------------------------------------
    def _serve_ui(self, route: str):
        if not self.ui_dir:
            return self._send_json({
                "service": "tcbforge",
                "routes": ["/design", "/drc", "/grid", "/mesh?folded=bool",
                           "/traces", "/vias", "/sockets", "/bends", "/save"]})
        rel = route[3:].lstrip("/") if route.startswith("/ui") else ""
        rel = rel or "index.html"
        full = os.path.normpath(os.path.join(self.ui_dir, rel))
        if not full.startswith(os.path.abspath(self.ui_dir) + os.sep) \
                and full != os.path.abspath(self.ui_dir):
            return self._send_errors(["bad path"], status=404)
        if not os.path.isfile(full):
            return self._send_errors([f"no such file {rel!r}"], status=404)
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            body = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)


def make_server(service: DesignService, port: int = 0,
                ui_dir: str | None = None) -> ThreadingHTTPServer:
    """Bind the service on localhost. port=0 picks a free port; the bound
    port is available as server.server_address[1]."""
    handler = type("BoundHandler", (_Handler,), {
        "service": service,
        "ui_dir": os.path.abspath(ui_dir) if ui_dir else None,
    })
    return ThreadingHTTPServer(("127.0.0.1", port), handler)
