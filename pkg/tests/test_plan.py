import random

import pytest

from tcbforge.drc import DrcReport, run_drc
from tcbforge.errors import PlanError
from tcbforge.geometry import BendLine
from tcbforge.layout import Trace
from tcbforge.plan import PHASES, PlanStep, ProcessPlan, plan_process

from helpers import led_board, random_board, simple_board


def plan_for(board, force=False):
    return plan_process(board, run_drc(board), force=force)


def test_led_sample_plates_for_an_hour():
    plan = plan_for(led_board())
    assert plan.plating_minutes() == pytest.approx(60.0)


def test_fine_traces_double_the_plating():
    board = led_board()
    fine = board.replace(traces=board.traces + (
        Trace("hairline", "top", ((4, 4), (8, 4)), width=0.5),))
    plan = plan_for(fine)
    assert plan.plating_minutes() == pytest.approx(120.0)


def test_point_six_wide_trace_counts_as_fine():
    board = simple_board(traces=(Trace("t", "top", ((2, 2), (6, 2)), width=0.6),))
    assert plan_for(board).plating_minutes() == pytest.approx(120.0)


def test_bend_steps_in_sequence_order():
    board = simple_board(bends=(
        BendLine("late", (-1, 25.0), (41, 25.0), 45.0, 3.0, 2),
        BendLine("early", (-1, 10.0), (41, 10.0), 90.0, 3.0, 1),
    ))
    plan = plan_for(board)
    bend_steps = [s for s in plan.steps if s.phase == "bend"]
    assert len(bend_steps) == 2
    assert "early" in bend_steps[0].name
    assert "late" in bend_steps[1].name
    assert dict(bend_steps[0].parameters)["air_temp_c"] == 160.0


def test_three_bends_three_steps():
    board = simple_board(bends=tuple(
        BendLine(f"b{i}", (-1, 8.0 + 6 * i), (41, 8.0 + 6 * i), 45.0, 3.0, i + 1)
        for i in range(3)))
    plan = plan_for(board)
    assert sum(1 for s in plan.steps if s.phase == "bend") == 3


def test_plating_schedule_steps_voltage_up():
    plan = plan_for(led_board())
    volts = [dict(s.parameters)["voltage_v"] for s in plan.steps if s.phase == "plate"]
    assert volts == [0.2, 0.3, 0.4]
    rpm = {dict(s.parameters)["stir_rpm"] for s in plan.steps if s.phase == "plate"}
    assert rpm == {400.0}


def test_print_step_parameters():
    plan = plan_for(led_board())
    printing = [s for s in plan.steps if s.phase == "print"]
    assert len(printing) == 1
    params = dict(printing[0].parameters)
    assert params["bed_temp_c"] == 55.0
    assert params["conductive_temp_c"] == 150.0
    assert params["conductive_speed_mm_s"] == 10.0
    assert params["insulator_temp_c"] == 205.0
    assert params["insulator_speed_mm_s"] == 45.0


def test_assembly_lists_paste_and_sockets():
    plan = plan_for(led_board())
    assembly = [s for s in plan.steps if s.phase == "assemble"]
    assert any("silver paste" in s.name for s in assembly)
    press = [s for s in assembly if "press-fit" in s.name]
    assert press and dict(press[0].parameters)["sockets"] == 2


def test_rule_errors_block_planning():
    board = simple_board(traces=(Trace("thin", "top", ((2, 2), (6, 2)), width=0.4),))
    report = run_drc(board)
    with pytest.raises(PlanError):
        plan_process(board, report)
    forced = plan_process(board, report, force=True)
    assert forced.steps


def test_phase_order_invariant_is_enforced():
    with pytest.raises(PlanError):
        ProcessPlan(steps=(
            PlanStep("plate", "x", 1.0),
            PlanStep("print", "y", 1.0),
        ))


def test_random_boards_keep_phase_order():
    rng = random.Random(5)
    for _ in range(40):
        board = random_board(rng)
        plan = plan_process(board, run_drc(board), force=True)
        phases = [PHASES.index(s.phase) for s in plan.steps]
        assert phases == sorted(phases)
        bends = [s for s in plan.steps if s.phase == "bend"]
        assert len(bends) == len(board.bends)
        if board.traces:
            assert plan.plating_minutes() in (60.0, 120.0)


def test_plan_serialization_round_trip():
    plan = plan_for(led_board())
    text = plan.to_text()
    assert "electroplate" in text
    assert text == plan.to_text()
    doc = plan.to_dict()
    assert doc["total_minutes"] == plan.total_minutes
    assert [s["phase"] for s in doc["steps"]] == [s.phase for s in plan.steps]
