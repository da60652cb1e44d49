import random

import pytest

from tcbforge.drc import (
    BendPenaltyTable,
    DrcConfig,
    check_current,
    check_flex,
    check_geometry,
    estimate_trace_resistance,
    exceeds_fracture_strain,
    run_drc,
)
from tcbforge.errors import GeometryError
from tcbforge.geometry import BendLine, FlexZone, PlanarOutline, Stackup
from tcbforge.layout import BoardDesign, Trace, Via

from helpers import fig4_trace_board, led_board, random_board, simple_board


# ---------------------------------------------------------------------------
# resistance model (measured 50 mm x 1.3 mm x 0.5 mm samples)
# ---------------------------------------------------------------------------

def test_flat_unplated_resistance():
    board = fig4_trace_board()
    r = estimate_trace_resistance(board.traces[0], board, plated=False)
    assert r == pytest.approx(10.2, rel=0.01)


def test_flat_plated_resistance():
    board = fig4_trace_board()
    r = estimate_trace_resistance(board.traces[0], board, plated=True)
    assert r == pytest.approx(0.10, rel=0.01)


@pytest.mark.parametrize("angle,expected", [(15, 10.6), (45, 10.9), (90, 15.7)])
def test_bent_unplated_resistance(angle, expected):
    board = fig4_trace_board(bend_angle=angle)
    r = estimate_trace_resistance(board.traces[0], board, plated=False)
    assert r == pytest.approx(expected, rel=0.02)


@pytest.mark.parametrize("angle", [15, 45, 90])
def test_bent_plated_resistance(angle):
    board = fig4_trace_board(bend_angle=angle)
    r = estimate_trace_resistance(board.traces[0], board, plated=True)
    assert r == pytest.approx(0.2, rel=0.02)


def test_ninety_degree_multiplier():
    flat = estimate_trace_resistance(fig4_trace_board().traces[0],
                                     fig4_trace_board(), plated=False)
    bent_board = fig4_trace_board(bend_angle=90)
    bent = estimate_trace_resistance(bent_board.traces[0], bent_board, plated=False)
    assert bent / flat == pytest.approx(1.539, abs=0.001)


def test_penalty_table_endpoints_exact():
    table = BendPenaltyTable()
    assert table.factor(0, plated=False) == 1.0
    assert table.factor(15, plated=False) == 10.6 / 10.2
    assert table.factor(45, plated=False) == 10.9 / 10.2
    assert table.factor(90, plated=False) == 15.7 / 10.2
    assert table.factor(0, plated=True) == 1.0
    for angle in (15, 30, 45, 60, 90, 135):
        assert table.factor(angle, plated=True) == 2.0
    # interpolation is monotone and clamped
    assert 1.0 < table.factor(7.5, plated=False) < 10.6 / 10.2
    assert table.factor(180, plated=False) == 15.7 / 10.2
    assert table.factor(-90, plated=False) == 15.7 / 10.2


def test_resistance_scaling_properties():
    short = fig4_trace_board()
    long_board = short.replace(
        outline=PlanarOutline.rectangle(110.0, 20.0),
        traces=(Trace("dut", "top", ((0, 2), (40, 2)), width=1.3, height=0.5),))
    r_short = estimate_trace_resistance(short.traces[0], short, False)
    r_long = estimate_trace_resistance(long_board.traces[0], long_board, False)
    assert r_long == pytest.approx(2 * r_short)

    wide = short.replace(traces=(short.traces[0].__class__(
        "dut", "top", ((0, 2), (20, 2)), width=2.6, height=0.5),))
    r_wide = estimate_trace_resistance(wide.traces[0], wide, False)
    assert r_wide == pytest.approx(r_short / 2)


def test_plated_always_below_unplated():
    rng = random.Random(4)
    for _ in range(20):
        board = random_board(rng)
        for t in board.traces:
            unplated = estimate_trace_resistance(t, board, False)
            plated = estimate_trace_resistance(t, board, True)
            assert plated < unplated


def test_double_crossing_compounds():
    board = fig4_trace_board(bend_angle=90)
    back = BendLine("fold2", (40.0, 21.0), (40.0, -1.0), 90.0, 3.0, 2)
    board2 = board.replace(bends=board.bends + (back,))
    r1 = estimate_trace_resistance(board.traces[0], board, False)
    r2 = estimate_trace_resistance(board2.traces[0], board2, False)
    assert r2 / r1 == pytest.approx(15.7 / 10.2, rel=1e-6)


def test_zero_cross_section_rejected():
    board = fig4_trace_board()
    trace = Trace("ghost", "top", ((0, 2), (20, 2)), width=1.0, height=1e-12)
    with pytest.raises(GeometryError):
        estimate_trace_resistance(trace, board, False)


# ---------------------------------------------------------------------------
# geometry rules
# ---------------------------------------------------------------------------

def test_width_floor():
    thin = simple_board(traces=(Trace("thin", "top", ((2, 2), (6, 2)), width=0.4),))
    findings = check_geometry(thin)
    assert any(f.rule == "geom.trace-width" and f.severity == "error"
               for f in findings)
    ok = simple_board(traces=(Trace("ok", "top", ((2, 2), (6, 2)), width=0.5),))
    assert not any(f.rule == "geom.trace-width" for f in check_geometry(ok))


def clearance_board(rows_apart=1, same_net=False, pitch=1.4):
    outline = PlanarOutline.rectangle(20.0, 12.0)
    traces = [
        Trace("a", "top", ((0, 0), (4, 0)), width=1.0),
        Trace("b", "top", ((0, rows_apart), (4, rows_apart)), width=1.0),
    ]
    if same_net:
        traces.append(Trace("link", "top", ((0, 0), (0, rows_apart)), width=1.0))
    return BoardDesign(name="clear", outline=outline,
                       stackup=Stackup((0.3, 0.3, 0.3, 0.3)), pitch=pitch,
                       margin=pitch, traces=tuple(traces))


def test_clearance_error_between_distinct_nets():
    findings = check_geometry(clearance_board())
    spacing = [f for f in findings if f.rule == "geom.spacing"]
    assert len(spacing) == 1
    clearance = dict(spacing[0].evidence)["clearance"]
    assert clearance == pytest.approx(0.4, abs=1e-9)  # 1.4 - 2*(1.0/2)


def test_clearance_exactly_at_floor_passes():
    board = clearance_board(pitch=1.5)  # clearance exactly 0.5
    findings = check_geometry(board)
    assert not any(f.rule == "geom.spacing" for f in findings)
    assert any(f.rule == "geom.spacing-0603" for f in findings)


def test_same_net_pairs_ignored():
    findings = check_geometry(clearance_board(same_net=True))
    assert not any(f.rule == "geom.spacing" for f in findings)


def test_smd_gap_info_window():
    wide = clearance_board(pitch=1.9)  # clearance 0.9: beyond 0603 reach
    assert not any(f.rule.startswith("geom.spacing")
                   for f in check_geometry(wide))


def test_via_to_trace_clearance_checked():
    board = simple_board(
        traces=(Trace("a", "top", ((2, 2), (6, 2)), width=1.0),),
        vias=(Via("v", (4, 3), radius=2.0),))  # 2.54 away, big barrel
    findings = check_geometry(board)
    spacing = [f for f in findings if f.rule == "geom.spacing"]
    assert spacing and set(spacing[0].elements) == {"a", "v"}


def test_spacing_symmetric_in_pair_order():
    board = clearance_board()
    swapped = board.replace(traces=tuple(reversed(board.traces)))
    assert [f.sort_key() for f in check_geometry(board)] == \
        [f.sort_key() for f in check_geometry(swapped)]


# ---------------------------------------------------------------------------
# flex rules
# ---------------------------------------------------------------------------

def flex_board(deflection, with_trace=True, direction=None):
    traces = (Trace("runner", "top", ((2, 4), (12, 4))),) if with_trace else ()
    zone = FlexZone("fz", (17.78, 12.7), 6.0, deflection, direction)
    return simple_board(traces=traces, flex_zones=(zone,))


def test_fracture_error_at_measured_deflection():
    findings = check_flex(flex_board(21.24))
    assert any(f.rule == "flex.fracture" and f.severity == "error" for f in findings)


def test_below_warning_band_is_silent():
    assert check_flex(flex_board(10.0)) == []  # 10 < 0.8*18.46


def test_warning_band():
    findings = check_flex(flex_board(15.0))
    assert any(f.rule == "flex.near-fracture" and f.severity == "warning"
               for f in findings)


def test_zone_without_traces_is_silent():
    assert check_flex(flex_board(25.0, with_trace=False)) == []


def test_orientation_info_for_parallel_trace():
    findings = check_flex(flex_board(5.0, direction=0.0))
    assert any(f.rule == "flex.orientation" for f in findings)
    across = check_flex(flex_board(5.0, direction=90.0))
    assert not any(f.rule == "flex.orientation" for f in across)


def test_orientation_derived_from_crossing_bend():
    # vertical fold axis through the zone: deflection direction is horizontal
    bend = BendLine("fold", (17.78, 36.0), (17.78, -1.0), 45.0, 3.0, 1)
    board = flex_board(5.0).replace(bends=(bend,))
    findings = check_flex(board)
    assert any(f.rule == "flex.orientation" for f in findings)


def test_fracture_strain_helper():
    assert exceeds_fracture_strain(0.0127)
    assert exceeds_fracture_strain(0.0110)
    assert not exceeds_fracture_strain(0.0109)


# ---------------------------------------------------------------------------
# current rules
# ---------------------------------------------------------------------------

def current_board():
    return simple_board(traces=(Trace("load", "top", ((2, 2), (12, 2)), width=1.3),))


def test_plated_reference_current_is_info():
    findings = check_current(current_board(), {"load": 2.52})
    assert [f.rule for f in findings] == ["current.plated-ok"]
    assert findings[0].severity == "info"


def test_above_reference_current_warns():
    findings = check_current(current_board(), {"load": 6.0})
    assert [f.rule for f in findings] == ["current.above-reference"]
    assert findings[0].severity == "warning"


def test_unplated_overload_is_error():
    findings = check_current(current_board(), {"load": 2.52}, plated=False)
    assert [f.rule for f in findings] == ["current.unplated-overload"]
    assert findings[0].severity == "error"
    low = check_current(current_board(), {"load": 0.3}, plated=False)
    assert [f.rule for f in low] == ["current.unplated-ok"]


def test_unknown_trace_current_is_error():
    findings = check_current(current_board(), {"nope": 1.0})
    assert [f.rule for f in findings] == ["current.unknown-trace"]


def test_negative_current_rejected():
    with pytest.raises(GeometryError):
        check_current(current_board(), {"load": -1.0})


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

def test_led_sample_passes_with_defaults():
    report = run_drc(led_board())
    assert report.passed
    assert report.error_count == 0


def test_raised_width_floor_fails_every_trace():
    board = led_board()
    cfg = DrcConfig().with_overrides({"min_trace_width": 1.5})
    report = run_drc(board, cfg)
    width_errors = [f for f in report.errors() if f.rule == "geom.trace-width"]
    assert len(width_errors) == len(board.traces)


def test_empty_board_report_is_empty():
    report = run_drc(simple_board())
    assert report.findings == ()
    assert report.passed


def test_structural_errors_reported_through_drc():
    board = simple_board(vias=(Via("x", (99, 99)),))
    report = run_drc(board)
    assert not report.passed
    assert all(f.rule.startswith("structure.") for f in report.findings)


def test_report_contains_resistance_table():
    report = run_drc(led_board())
    rows = [f for f in report.findings if f.rule == "resist.trace"]
    assert len(rows) == 3
    for row in rows:
        ev = dict(row.evidence)
        assert ev["plated_ohms"] < ev["unplated_ohms"]


def test_report_deterministic():
    a = run_drc(led_board()).to_text()
    b = run_drc(led_board()).to_text()
    assert a == b
    shuffled = led_board()
    shuffled = shuffled.replace(traces=tuple(reversed(shuffled.traces)))
    assert run_drc(shuffled).to_text() == a


def test_config_overrides_validate():
    with pytest.raises(GeometryError):
        DrcConfig().with_overrides({"does_not_exist": 1.0})
    with pytest.raises(GeometryError):
        DrcConfig(min_trace_width=0)


def _rank(sev):
    return {"info": 0, "warning": 1, "error": 2}[sev]


def test_tightening_thresholds_never_removes_findings():
    rng = random.Random(11)
    loose_cfg = DrcConfig()
    tight_cfg = DrcConfig(min_trace_width=1.0, min_spacing=0.8,
                          fracture_deflection=10.0)
    for _ in range(25):
        board = random_board(rng)
        loose = run_drc(board, loose_cfg)
        tight = run_drc(board, tight_cfg)
        for f in loose.findings:
            family = f.rule.split(".")[0]
            if family in ("resist", "thermoform", "current"):
                continue
            matches = [g for g in tight.findings
                       if g.elements == f.elements
                       and g.rule.split(".")[0] == family]
            assert matches, f"finding lost when tightening: {f}"
            assert max(_rank(g.severity) for g in matches) >= _rank(f.severity)
