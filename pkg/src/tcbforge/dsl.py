"""Parser and serializer for the textual board description (.tcb).

Line-oriented block syntax, `#` comments, statements separated by newlines
or semicolons. Units are always millimeters and degrees and are never
written. Grid coordinates are integer indices so a pitch change re-flows
the design. See docs/grammar.md for the full grammar; the canonical form
printed by serialize() is a fixed point of parse+serialize.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GeometryError, TcbError
from .geometry import BendLine, FlexZone, PlanarOutline, Stackup
from .layout import (
    BoardDesign,
    Socket,
    StructuralError,
    Trace,
    Via,
    validate_design,
)

DEFAULT_BOARD_NAME = "board"


@dataclass(frozen=True)
class SourceSpan:
    line: int      # 1-based
    column: int    # 1-based
    length: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        suffix = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"{self.span}: {self.message}{suffix}"


class DslError(TcbError, ValueError):
    """Parsing or serialization failed; carries every independent error."""

    def __init__(self, errors=(), structural=()):
        self.errors: tuple[ParseError, ...] = tuple(errors)
        self.structural: tuple[StructuralError, ...] = tuple(structural)
        parts = [str(e) for e in self.errors] + [str(s) for s in self.structural]
        super().__init__("; ".join(parts) if parts else "invalid document")


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_PUNCT = {"{": "LBRACE", "}": "RBRACE", "(": "LPAREN", ")": "RPAREN",
          ",": "COMMA", ";": "SEMI"}


@dataclass(frozen=True)
class _Token:
    kind: str          # WORD NUMBER STRING LBRACE ... NEWLINE EOF ERROR
    text: str
    span: SourceSpan
    value: float | None = None
    is_int: bool = False


def _lex(text: str) -> tuple[list[_Token], list[ParseError]]:
    tokens: list[_Token] = []
    errors: list[ParseError] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def span(length: int, at_col: int | None = None) -> SourceSpan:
        return SourceSpan(line, at_col if at_col is not None else col, length)

    while i < n:
        ch = text[i]
        if ch == "\r":
            # CRLF and lone CR both count as one newline
            if i + 1 < n and text[i + 1] == "\n":
                i += 1
            tokens.append(_Token("NEWLINE", "\n", span(1)))
            i += 1
            line += 1
            col = 1
            continue
        if ch == "\n":
            tokens.append(_Token("NEWLINE", "\n", span(1)))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] not in "\r\n":
                i += 1
                col += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token(_PUNCT[ch], ch, span(1)))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_col = col
            i += 1
            col += 1
            buf = []
            closed = False
            while i < n and text[i] not in "\r\n":
                c = text[i]
                if c == "\\" and i + 1 < n and text[i + 1] in ('"', "\\"):
                    buf.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                buf.append(c)
                i += 1
                col += 1
            s = "".join(buf)
            if not closed:
                errors.append(ParseError(span(col - start_col, start_col),
                                         "unterminated string"))
            tokens.append(_Token("STRING", s, span(col - start_col, start_col)))
            continue
        if ch.isdigit() or ch in "+-." and _looks_numeric(text, i):
            start_col = col
            j = i
            if text[j] in "+-":
                j += 1
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            raw = text[i:j]
            tok_span = SourceSpan(line, start_col, len(raw))
            try:
                value = float(raw)
            except ValueError:
                errors.append(ParseError(tok_span, f"bad number {raw!r}"))
                value = 0.0
            is_int = raw.lstrip("+-").isdigit()
            tokens.append(_Token("NUMBER", raw, tok_span, value, is_int))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(_Token("WORD", word, span(len(word))))
            col += j - i
            i = j
            continue
        errors.append(ParseError(span(1), f"unexpected character {ch!r}"))
        i += 1
        col += 1

    tokens.append(_Token("EOF", "", SourceSpan(line, col, 0)))
    return tokens, errors


def _looks_numeric(text: str, i: int) -> bool:
    if text[i].isdigit():
        return True
    return i + 1 < len(text) and (text[i + 1].isdigit() or text[i + 1] == ".")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_STATEMENT_KEYWORDS = ("outline", "pitch", "margin", "stackup", "trace",
                       "via", "socket", "bend", "flexzone")
_TERMINATORS = ("NEWLINE", "SEMI", "RBRACE", "EOF")


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.errors: list[ParseError] = []

    # -- token plumbing ----------------------------------------------------
    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def skip_newlines(self) -> None:
        while self.peek().kind in ("NEWLINE", "SEMI"):
            self.advance()

    def error(self, tok: _Token, message: str, expected=()) -> None:
        self.errors.append(ParseError(tok.span, message, tuple(expected)))

    def sync(self) -> None:
        while self.peek().kind not in _TERMINATORS:
            self.advance()

    def expect_word(self, word: str) -> _Token | None:
        tok = self.peek()
        if tok.kind == "WORD" and tok.text == word:
            return self.advance()
        self.error(tok, f"expected {word!r}, found {_describe(tok)}", (word,))
        return None

    def expect_kind(self, kind: str, what: str) -> _Token | None:
        tok = self.peek()
        if tok.kind == kind:
            return self.advance()
        self.error(tok, f"expected {what}, found {_describe(tok)}", (what,))
        return None

    def number(self, what: str) -> float | None:
        tok = self.expect_kind("NUMBER", what)
        return None if tok is None else float(tok.value)

    def integer(self, what: str) -> int | None:
        tok = self.peek()
        if tok.kind == "NUMBER" and tok.is_int:
            self.advance()
            return int(tok.value)
        if tok.kind == "NUMBER":
            self.advance()
            self.error(tok, f"{what} must be an integer, got {tok.text}", (what,))
            return None
        self.error(tok, f"expected {what}, found {_describe(tok)}", (what,))
        return None

    def pair(self, coord) -> tuple | None:
        if self.expect_kind("LPAREN", "'('") is None:
            return None
        a = coord()
        if self.expect_kind("COMMA", "','") is None:
            return None
        b = coord()
        if self.expect_kind("RPAREN", "')'") is None:
            return None
        if a is None or b is None:
            return None
        return (a, b)

    def grid_point(self) -> tuple[int, int] | None:
        return self.pair(lambda: self.integer("grid index"))

    def point_mm(self) -> tuple[float, float] | None:
        return self.pair(lambda: self.number("coordinate"))

    # -- grammar -----------------------------------------------------------
    def parse_document(self) -> dict | None:
        self.skip_newlines()
        if self.peek().kind == "EOF":
            self.error(self.peek(), "empty document", ("board",))
            return None
        board_tok = self.expect_word("board")
        if board_tok is None:
            return None
        name = DEFAULT_BOARD_NAME
        if self.peek().kind == "STRING":
            name = self.advance().text
        self.skip_newlines()
        if self.expect_kind("LBRACE", "'{'") is None:
            return None

        doc: dict = {"name": name, "board_span": board_tok.span,
                     "fields": {}, "elements": []}
        while True:
            self.skip_newlines()
            tok = self.peek()
            if tok.kind == "RBRACE":
                self.advance()
                break
            if tok.kind == "EOF":
                self.error(tok, "unterminated board block", ("}",))
                break
            before = self.pos
            self.statement(doc)
            if self.pos == before:
                self.advance()  # always make progress
            tok = self.peek()
            if tok.kind not in _TERMINATORS:
                self.error(tok, f"unexpected {_describe(tok)} after statement")
                self.sync()
        self.skip_newlines()
        tail = self.peek()
        if tail.kind != "EOF":
            self.error(tail, f"unexpected {_describe(tail)} after closing '}}'")
        return doc

    def statement(self, doc: dict) -> None:
        tok = self.peek()
        if tok.kind != "WORD":
            self.error(tok, f"expected a statement, found {_describe(tok)}",
                       _STATEMENT_KEYWORDS)
            self.sync()
            return
        keyword = tok.text
        if keyword not in _STATEMENT_KEYWORDS:
            self.advance()
            self.error(tok, f"unknown statement {keyword!r}", _STATEMENT_KEYWORDS)
            self.sync()
            return
        self.advance()
        handler = getattr(self, f"stmt_{keyword}")
        start_errors = len(self.errors)
        result = handler(tok)
        if len(self.errors) > start_errors:
            self.sync()
            return
        if result is not None:
            key, value = result
            if key in ("outline", "pitch", "margin", "stackup"):
                if key in doc["fields"]:
                    self.error(tok, f"duplicate {key!r} statement")
                else:
                    doc["fields"][key] = (value, tok.span)
            else:
                doc["elements"].append((key, value, tok.span))

    def stmt_outline(self, tok: _Token):
        shape = self.peek()
        if shape.kind == "WORD" and shape.text == "rect":
            self.advance()
            w = self.number("width")
            h = self.number("height")
            if w is None or h is None:
                return None
            return ("outline", ("rect", w, h))
        if shape.kind == "WORD" and shape.text == "polygon":
            self.advance()
            pts = []
            while self.peek().kind == "LPAREN":
                p = self.point_mm()
                if p is None:
                    return None
                pts.append(p)
            if len(pts) < 3:
                self.error(tok, f"polygon outline needs at least 3 points, got {len(pts)}")
                return None
            return ("outline", ("polygon", tuple(pts)))
        self.error(shape, f"expected 'rect' or 'polygon', found {_describe(shape)}",
                   ("rect", "polygon"))
        return None

    def stmt_pitch(self, tok: _Token):
        v = self.number("pitch")
        if v is None:
            return None
        if v <= 0:
            self.error(tok, f"pitch must be positive, got {v:g}")
            return None
        return ("pitch", v)

    def stmt_margin(self, tok: _Token):
        v = self.number("margin")
        if v is None:
            return None
        if v < 0:
            self.error(tok, f"margin must be non-negative, got {v:g}")
            return None
        return ("margin", v)

    def stmt_stackup(self, tok: _Token):
        heights = []
        for _ in range(4):
            v = self.number("layer height")
            if v is None:
                return None
            heights.append(v)
        return ("stackup", tuple(heights))

    def element_id(self) -> str | None:
        tok = self.expect_kind("STRING", "quoted id")
        if tok is None:
            return None
        if not tok.text:
            self.error(tok, "id must not be empty")
            return None
        return tok.text

    def layer(self) -> str | None:
        tok = self.peek()
        if tok.kind == "WORD" and tok.text in ("top", "bottom"):
            self.advance()
            return tok.text
        self.error(tok, f"expected layer, found {_describe(tok)}", ("top", "bottom"))
        return None

    def keyword_value(self, word: str, reader, default=None, required=False):
        tok = self.peek()
        if tok.kind == "WORD" and tok.text == word:
            self.advance()
            return reader()
        if required:
            self.error(tok, f"expected {word!r}, found {_describe(tok)}", (word,))
            return None
        return default

    def stmt_trace(self, tok: _Token):
        tid = self.element_id()
        layer = self.layer()
        width = self.keyword_value("width", lambda: self.number("width"), 1.0)
        height = self.keyword_value("height", lambda: self.number("height"), 0.3)
        if self.expect_word("path") is None:
            return None
        pts = []
        while self.peek().kind == "LPAREN":
            p = self.grid_point()
            if p is None:
                return None
            pts.append(p)
        if tid is None or layer is None or width is None or height is None:
            return None
        if len(pts) < 2:
            self.error(tok, f"trace path needs at least 2 points, got {len(pts)}")
            return None
        return ("trace", {"id": tid, "layer": layer, "width": width,
                          "height": height, "path": tuple(pts)})

    def stmt_via(self, tok: _Token):
        vid = self.element_id()
        if self.expect_word("at") is None:
            return None
        at = self.grid_point()
        radius = self.keyword_value("radius", lambda: self.number("radius"), 0.6)
        if vid is None or at is None or radius is None:
            return None
        return ("via", {"id": vid, "at": at, "radius": radius})

    def stmt_socket(self, tok: _Token):
        sid = self.element_id()
        layer = self.layer()
        if self.expect_word("at") is None:
            return None
        at = self.grid_point()
        radius = self.keyword_value("radius", lambda: self.number("radius"), 1.0)
        depth = self.keyword_value("depth", lambda: self.number("depth"), 2.0)
        if sid is None or layer is None or at is None or radius is None or depth is None:
            return None
        return ("socket", {"id": sid, "layer": layer, "at": at,
                           "radius": radius, "depth": depth})

    def stmt_bend(self, tok: _Token):
        bid = self.element_id()
        if self.expect_word("from") is None:
            return None
        start = self.point_mm()
        if self.expect_word("to") is None:
            return None
        end = self.point_mm()
        angle = self.keyword_value("angle", lambda: self.number("angle"), required=True)
        radius = self.keyword_value("radius", lambda: self.number("radius"), 3.0)
        seq = self.keyword_value("seq", lambda: self.integer("sequence"), 0)
        if None in (bid, start, end, angle, radius, seq):
            return None
        return ("bend", {"id": bid, "start": start, "end": end,
                         "angle": angle, "radius": radius, "seq": seq})

    def stmt_flexzone(self, tok: _Token):
        zid = self.element_id()
        if self.expect_word("at") is None:
            return None
        center = self.point_mm()
        radius = self.keyword_value("radius", lambda: self.number("radius"),
                                    required=True)
        deflect = self.keyword_value("deflect", lambda: self.number("deflection"),
                                     required=True)
        direction = self.keyword_value("direction", lambda: self.number("direction"))
        if None in (zid, center, radius, deflect):
            return None
        return ("flexzone", {"id": zid, "center": center, "radius": radius,
                             "deflect": deflect, "direction": direction})


def _describe(tok: _Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "NEWLINE":
        return "end of line"
    if tok.kind == "STRING":
        return f'string "{tok.text}"'
    return repr(tok.text)


# ---------------------------------------------------------------------------
# document -> BoardDesign
# ---------------------------------------------------------------------------

def parse(text: str) -> BoardDesign:
    """Parse a .tcb document into a structurally valid BoardDesign.

    All-or-nothing: raises DslError carrying every lexical, syntactic and
    semantic error found (with line:column spans), never a partial design.
    """
    tokens, errors = _lex(text)
    parser = _Parser(tokens)
    doc = parser.parse_document()
    errors.extend(parser.errors)
    if doc is None:
        raise DslError(errors or
                       [ParseError(SourceSpan(1, 1, 0), "empty document", ("board",))])

    fields = doc["fields"]
    board_span = doc["board_span"]
    for required in ("outline", "pitch", "stackup"):
        if required not in fields:
            errors.append(ParseError(board_span, f"missing {required!r} statement"))

    spans: dict[str, SourceSpan] = {}
    built: dict[str, list] = {"trace": [], "via": [], "socket": [],
                              "bend": [], "flexzone": []}
    for kind, data, span in doc["elements"]:
        eid = data["id"]
        spans.setdefault(eid, span)
        try:
            if kind == "trace":
                built["trace"].append(Trace(eid, data["layer"], data["path"],
                                            data["width"], data["height"]))
            elif kind == "via":
                built["via"].append(Via(eid, data["at"], data["radius"]))
            elif kind == "socket":
                built["socket"].append(Socket(eid, data["layer"], data["at"],
                                              data["radius"], data["depth"]))
            elif kind == "bend":
                built["bend"].append(BendLine(eid, data["start"], data["end"],
                                              data["angle"], data["radius"],
                                              data["seq"]))
            elif kind == "flexzone":
                built["flexzone"].append(FlexZone(eid, data["center"], data["radius"],
                                                  data["deflect"], data["direction"]))
        except GeometryError as exc:
            errors.append(ParseError(span, str(exc)))

    outline = None
    stackup = None
    if "outline" in fields:
        value, span = fields["outline"]
        try:
            if value[0] == "rect":
                outline = PlanarOutline.rectangle(value[1], value[2])
            else:
                outline = PlanarOutline(value[1])
        except GeometryError as exc:
            errors.append(ParseError(span, str(exc)))
    if "stackup" in fields:
        value, span = fields["stackup"]
        try:
            stackup = Stackup(value)
        except GeometryError as exc:
            errors.append(ParseError(span, str(exc)))

    if errors or outline is None or stackup is None:
        raise DslError(errors)

    board = BoardDesign(
        name=doc["name"],
        outline=outline,
        stackup=stackup,
        pitch=fields["pitch"][0],
        margin=fields.get("margin", (0.0, None))[0],
        traces=tuple(built["trace"]),
        vias=tuple(built["via"]),
        sockets=tuple(built["socket"]),
        bends=tuple(built["bend"]),
        flex_zones=tuple(built["flexzone"]),
    )

    structural = validate_design(board)
    if structural:
        for s in structural:
            span = spans.get(s.element_id, board_span)
            errors.append(ParseError(span, s.message))
        raise DslError(errors)
    return board


# ---------------------------------------------------------------------------
# serializer
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    f = float(value)
    if f.is_integer() and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def _fmt_point(p) -> str:
    return f"({_fmt(p[0])},{_fmt(p[1])})"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize(board: BoardDesign) -> str:
    """Canonical text form: fixed key order, elements sorted by id, numbers
    printed with the fewest digits that round-trip exactly, LF endings.
    parse(serialize(b)) == b for every structurally valid board."""
    structural = validate_design(board)
    if structural:
        raise DslError(structural=structural)

    lines = [f"board {_quote(board.name)} {{"]
    rect = board.outline.is_rectangle()
    if rect is not None:
        lines.append(f"  outline rect {_fmt(rect[0])} {_fmt(rect[1])}")
    else:
        pts = " ".join(_fmt_point(p) for p in board.outline.vertices)
        lines.append(f"  outline polygon {pts}")
    lines.append(f"  pitch {_fmt(board.pitch)}")
    lines.append(f"  margin {_fmt(board.margin)}")
    lines.append("  stackup " + " ".join(_fmt(h) for h in board.stackup.layer_heights))
    for t in sorted(board.traces, key=lambda t: t.id):
        path = " ".join(_fmt_point(p) for p in t.path)
        lines.append(f"  trace {_quote(t.id)} {t.layer} width {_fmt(t.width)} "
                     f"height {_fmt(t.height)} path {path}")
    for v in sorted(board.vias, key=lambda v: v.id):
        lines.append(f"  via {_quote(v.id)} at {_fmt_point(v.at)} radius {_fmt(v.radius)}")
    for s in sorted(board.sockets, key=lambda s: s.id):
        lines.append(f"  socket {_quote(s.id)} {s.layer} at {_fmt_point(s.at)} "
                     f"radius {_fmt(s.radius)} depth {_fmt(s.depth)}")
    for b in sorted(board.bends, key=lambda b: b.id):
        lines.append(f"  bend {_quote(b.id)} from {_fmt_point(b.start)} to "
                     f"{_fmt_point(b.end)} angle {_fmt(b.angle_deg)} "
                     f"radius {_fmt(b.radius)} seq {b.sequence_index}")
    for z in sorted(board.flex_zones, key=lambda z: z.id):
        line = (f"  flexzone {_quote(z.id)} at {_fmt_point(z.center)} "
                f"radius {_fmt(z.radius)} deflect {_fmt(z.expected_deflection_deg)}")
        if z.direction_deg is not None:
            line += f" direction {_fmt(z.direction_deg)}"
        lines.append(line)
    lines.append("}")
    return "\n".join(lines) + "\n"
