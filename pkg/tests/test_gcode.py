import pytest

from tcbforge.errors import GcodeError
from tcbforge.gcode import (
    DEFAULT_TOOL_PROFILES,
    GcodeOptions,
    describe_patch,
    parse_gcode,
    patch_gcode,
)


TWO_TOOL = """\
; synthetic two-tool print
M115 U3.4.0 ; firmware check
M83
M140 S55
M190 S55
M109 S205
G28 W
G80
T0
G1 Z0.3 F720
G1 X10 Y10 F3000
G1 X30 Y10 E2.5 F1200
G1 X30 Y12 E0.2
T1
G1 X10 Y12 E2 F600
G1 X10 Y14 E0.2 F600
T0
G1 X30 Y14 E2 F1200
M104 S0
M140 S0
M84
"""


def patch_text(text, **opts):
    program = parse_gcode(text)
    return patch_gcode(program, options=GcodeOptions(**opts)).text()


def test_tool_events_detected():
    program = parse_gcode(TWO_TOOL)
    assert [t for _, t in program.tool_events] == [0, 1, 0]
    for i, _ in program.tool_events:
        assert program.lines[i].strip().startswith("T")


def test_temperatures_injected():
    out = patch_text(TWO_TOOL)
    assert "M104 S150\n" in out
    assert "M104 S205\n" in out


def test_exactly_one_pause_pair_per_material():
    out_lines = patch_text(TWO_TOOL).splitlines()
    pairs = [(a, b) for a, b in zip(out_lines, out_lines[1:]) if b == "M600"]
    assert ("M104 S150", "M600") in pairs
    assert ("M104 S205", "M600") in pairs
    assert len(pairs) == 2


def test_first_selection_has_no_pause():
    out_lines = patch_text(TWO_TOOL).splitlines()
    first_m104 = out_lines.index("M104 S205")
    assert out_lines[first_m104 + 1] != "M600"
    assert out_lines.count("M600") == 2


def test_original_lines_survive_byte_for_byte():
    program = parse_gcode(TWO_TOOL)
    patched = patch_gcode(program)
    tool_lines = {i for i, _ in program.tool_events}
    survivors = [l for i, l in enumerate(program.lines) if i not in tool_lines]
    # survivors appear in order, byte-identical, as a subsequence
    it = iter(patched.lines)
    for wanted in survivors:
        for line in it:
            if line == wanted:
                break
        else:
            pytest.fail(f"original line lost or reordered: {wanted!r}")
    # and everything else is an injected block line
    injected = [l for l in patched.lines if l not in survivors]
    allowed = ("; tool change ->", "M104 S150", "M104 S205", "M600", "; PURGE", ";  ")
    assert all(l.startswith(allowed) for l in injected)
    assert len(patched.lines) == len(survivors) + len(injected)


def test_double_patch_is_noop():
    once = patch_text(TWO_TOOL)
    twice = patch_text(once)
    assert twice == once


def test_no_tool_changes_passes_through():
    plain = "G28\nG1 X10 Y10 E1 F1200\nM84\n"
    assert patch_text(plain) == plain
    program = parse_gcode(plain)
    assert describe_patch(program, patch_gcode(program)).startswith("no tool changes")


def test_describe_patched_program():
    program = parse_gcode(TWO_TOOL)
    patched = patch_gcode(program)
    assert "replaced 3 tool change(s)" in describe_patch(program, patched)
    assert describe_patch(patched, patch_gcode(patched)) == "already patched, no changes"


def test_purge_reminder_when_leaving_conductive():
    out = patch_text(TWO_TOOL)
    assert "copper-based residue" in out
    idx = out.index("M104 S205\nM600\n")
    assert out.index("PURGE CHECK") > idx
    silent = patch_text(TWO_TOOL, purge_reminder=False)
    assert "PURGE CHECK" not in silent


def test_conductive_feedrates_rewritten():
    doc = TWO_TOOL.replace("G1 X10 Y12 E2 F600", "G1 X10 Y12 E2 F1800")
    out = patch_text(doc)
    assert "G1 X10 Y12 E2 F600\n" in out
    # insulator segment speeds untouched
    assert "G1 X30 Y14 E2 F1200\n" in out


def test_m220_speed_mode():
    out = patch_text(TWO_TOOL, speed_mode="m220")
    assert "M220 S22\n" in out   # 10 mm/s over the 45 mm/s insulator base
    assert "M220 S100\n" in out
    # feedrates untouched in this mode
    assert "G1 X10 Y12 E2 F600\n" in out


def test_unknown_tool_is_error_naming_line():
    doc = TWO_TOOL + "T7\n"
    lineno = doc.count("\n")  # T7 is the final line
    with pytest.raises(GcodeError, match=rf"line {lineno}: tool T7"):
        patch_gcode(parse_gcode(doc))


def test_crlf_lines_preserved():
    doc = TWO_TOOL.replace("\n", "\r\n")
    out = patch_text(doc)
    # untouched lines keep CRLF; injected lines use LF
    assert "G1 X30 Y14 E2 F1200\r\n" in out
    assert "M104 S150\n" in out


def test_default_profiles_match_recommended_settings():
    assert DEFAULT_TOOL_PROFILES[0].extruder_temp == 205
    assert DEFAULT_TOOL_PROFILES[0].print_speed == 45
    assert DEFAULT_TOOL_PROFILES[1].extruder_temp == 150
    assert DEFAULT_TOOL_PROFILES[1].print_speed == 10
    assert DEFAULT_TOOL_PROFILES[1].conductive
