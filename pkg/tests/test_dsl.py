import random
import time

import pytest

from tcbforge.dsl import DslError, ParseError, parse, serialize
from tcbforge.layout import BoardDesign

from helpers import random_board, simple_board


MINIMAL = "board { outline rect 60 40; pitch 2.54; stackup 0.3 0.3 0.3 0.3 }"

LED_DOC = """\
# two-sided LED loop
board "led_demo" {
  outline rect 40 35
  pitch 2.54
  margin 2.54
  stackup 0.3 0.3 0.3 0.3
  trace "bot_gnd" bottom width 1 height 0.3 path (2,2) (2,10)
  trace "bot_vcc" bottom width 1 height 0.3 path (12,2) (12,10)
  trace "top_led" top width 1 height 0.3 path (2,2) (12,2)
  via "v1" at (2,2) radius 0.6
  via "v2" at (12,2) radius 0.6
  socket "s_gnd" bottom at (2,10) radius 1 depth 2
  socket "s_vcc" bottom at (12,10) radius 1 depth 2
  bend "fold" from (-1,17.5) to (41,17.5) angle 90 radius 3 seq 1
}
"""


def test_minimal_document():
    board = parse(MINIMAL)
    assert board.name == "board"
    assert board.pitch == 2.54
    assert board.traces == ()
    assert board.outline.is_rectangle() == (60.0, 40.0)


def test_empty_string_is_one_error_at_origin():
    with pytest.raises(DslError) as exc:
        parse("")
    errors = exc.value.errors
    assert len(errors) == 1
    assert (errors[0].span.line, errors[0].span.column) == (1, 1)
    assert "board" in errors[0].expected


def test_full_document_round_trip():
    board = parse(LED_DOC)
    assert len(board.traces) == 3
    assert len(board.vias) == 2
    again = parse(serialize(board))
    assert again == board


def test_canonical_form_is_fixed_point():
    canonical = serialize(parse(LED_DOC))
    assert serialize(parse(canonical)) == canonical
    assert canonical.endswith("\n")
    assert "\r" not in canonical


def test_element_order_does_not_change_serialization():
    board = parse(LED_DOC)
    shuffled = board.replace(traces=tuple(reversed(board.traces)),
                             vias=tuple(reversed(board.vias)))
    assert serialize(shuffled) == serialize(board)


def test_crlf_and_comments_accepted():
    doc = MINIMAL.replace("; ", "\r\n") + "\r\n# trailing comment\r\n"
    board = parse(doc)
    assert board.pitch == 2.54


def test_off_grid_trace_is_semantic_error_with_span():
    doc = LED_DOC.replace('path (2,2) (2,10)', 'path (2,2) (99,99)')
    with pytest.raises(DslError) as exc:
        parse(doc)
    errors = exc.value.errors
    assert any("bot_gnd" in e.message and "off-grid" in e.message for e in errors)
    spanned = [e for e in errors if "off-grid" in e.message]
    assert spanned[0].span.line == 7  # the trace's own line


def test_multiple_independent_errors_reported():
    doc = """board {
  outline rect 60 40
  pitch 2.54
  stackup 0.3 0.3 0.3 0.3
  trace "a" top path (0,0)
  wibble 12
  via "v" at (1.5,2) radius 0.6
}"""
    with pytest.raises(DslError) as exc:
        parse(doc)
    messages = [e.message for e in exc.value.errors]
    assert any("at least 2 points" in m for m in messages)
    assert any("unknown statement" in m for m in messages)
    assert any("integer" in m for m in messages)


def test_duplicate_ids_rejected():
    doc = MINIMAL[:-1] + '; via "x" at (3,3); via "x" at (4,4) }'
    with pytest.raises(DslError) as exc:
        parse(doc)
    assert any("duplicate id" in e.message for e in exc.value.errors)


def test_duplicate_board_keys_rejected():
    doc = "board { outline rect 60 40; pitch 2.54; pitch 1.0; stackup 0.3 0.3 0.3 0.3 }"
    with pytest.raises(DslError) as exc:
        parse(doc)
    assert any("duplicate 'pitch'" in e.message for e in exc.value.errors)


def test_missing_required_fields_reported():
    with pytest.raises(DslError) as exc:
        parse("board { pitch 2.54 }")
    messages = " ".join(e.message for e in exc.value.errors)
    assert "outline" in messages and "stackup" in messages


def test_unterminated_block():
    with pytest.raises(DslError) as exc:
        parse("board { outline rect 60 40")
    assert any("unterminated" in e.message for e in exc.value.errors)


def test_error_spans_index_real_positions():
    bad_docs = [
        "board { pitch x }",
        "board xyzzy { }",
        'board "b" { outline rect -3 4; pitch 1; stackup 0.3 0.3 0.3 0.3 }',
        'board "b" { outline polygon (0,0) (1,0); pitch 1; stackup 0.3 0.3 0.3 0.3 }',
    ]
    for doc in bad_docs:
        with pytest.raises(DslError) as exc:
            parse(doc)
        lines = doc.split("\n")
        for err in exc.value.errors:
            assert 1 <= err.span.line <= len(lines)
            assert 1 <= err.span.column <= len(lines[err.span.line - 1]) + 2


def test_serialize_refuses_invalid_board():
    from tcbforge.layout import Via
    bad = simple_board(vias=(Via("a", (0, 0)), Via("b", (0, 0))))
    with pytest.raises(DslError) as exc:
        serialize(bad)
    assert exc.value.structural


def test_polygon_outline_round_trip():
    doc = """board "poly" {
  outline polygon (0,0) (30,0) (30,12.5) (14,12.5) (14,25) (0,25)
  pitch 2.54
  stackup 0.3 0.3 0.3 0.3
}"""
    board = parse(doc)
    assert board.outline.is_rectangle() is None
    assert parse(serialize(board)) == board


def test_defaults_fill_in():
    doc = """board {
  outline rect 60 40
  pitch 2.54
  stackup 0.3 0.3 0.3 0.3
  trace "t" top path (2,2) (4,2)
  via "v" at (6,6)
  socket "s" top at (8,8)
}"""
    board = parse(doc)
    assert board.traces[0].width == 1.0
    assert board.traces[0].height == 0.3
    assert board.vias[0].radius == 0.6
    assert board.sockets[0].radius == 1.0
    assert board.sockets[0].depth == 2.0
    assert board.margin == 0.0


# ---------------------------------------------------------------------------
# property tests
# ---------------------------------------------------------------------------

def test_random_boards_round_trip():
    rng = random.Random(20260810)
    for _ in range(150):
        board = random_board(rng)
        text = serialize(board)
        again = parse(text)
        assert again == board, text
        assert serialize(again) == text


def test_fuzz_arbitrary_bytes_fail_gracefully():
    rng = random.Random(99)
    start = time.monotonic()
    for i in range(1500):
        n = rng.randrange(0, 160)
        blob = bytes(rng.randrange(256) for _ in range(n)).decode("latin-1")
        try:
            result = parse(blob)
            assert isinstance(result, BoardDesign)
        except DslError as exc:
            assert exc.errors or exc.structural
            for err in exc.errors:
                assert err.span.line >= 1 and err.span.column >= 1
    assert time.monotonic() - start < 20


def test_fuzz_mutated_documents_fail_gracefully():
    rng = random.Random(7)
    base = LED_DOC
    for _ in range(800):
        chars = list(base)
        for _ in range(rng.randrange(1, 6)):
            pos = rng.randrange(len(chars))
            op = rng.random()
            if op < 0.4:
                chars[pos] = chr(rng.randrange(32, 127))
            elif op < 0.7:
                del chars[pos]
            else:
                chars.insert(pos, chr(rng.randrange(32, 127)))
        mutated = "".join(chars)
        try:
            parse(mutated)
        except DslError:
            pass
