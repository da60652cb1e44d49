"""Ordered fabrication plan: print, bend, plate, assemble.

Plating always follows bending (plating a bent part is fine; bending a
plated part fractures the copper), so the phase order is a hard invariant.
The plating schedule steps the supply 0.2 V -> 0.3 V -> 0.4 V over an hour
for ordinary boards and two hours when any trace is at or below 0.6 mm,
with the bath stirred at 400 rpm throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

from .drc import DrcReport
from .errors import PlanError
from .gcode import BED_TEMP, CONDUCTIVE_TOOL, INSULATOR_PLA, ToolProfile
from .layout import BoardDesign

PHASES = ("print", "bend", "plate", "assemble")

HOT_AIR_TEMP = 160.0          # C, heat-bending air temperature
STIR_RPM = 400.0
FINE_TRACE_WIDTH = 0.6        # mm; at or below this, plate for two hours
PLATING_STAGES = ((0.2, 20.0), (0.3, 20.0), (0.4, 20.0))  # (volts, minutes)
PASTE_CURE_MINUTES = 20.0     # silver paste, room temperature


@dataclass(frozen=True)
class PlanStep:
    phase: str
    name: str
    duration_min: float
    parameters: tuple[tuple[str, object], ...] = ()

    def to_dict(self) -> dict:
        return {"phase": self.phase, "name": self.name,
                "duration_min": self.duration_min,
                "parameters": {k: v for k, v in self.parameters}}


@dataclass(frozen=True)
class ProcessPlan:
    steps: tuple[PlanStep, ...]

    def __post_init__(self) -> None:
        order = [PHASES.index(s.phase) for s in self.steps]
        if order != sorted(order):
            raise PlanError("steps out of phase order (print->bend->plate->assemble)")

    @property
    def total_minutes(self) -> float:
        return sum(s.duration_min for s in self.steps)

    def plating_minutes(self) -> float:
        return sum(s.duration_min for s in self.steps if s.phase == "plate")

    def to_text(self) -> str:
        lines = []
        for i, s in enumerate(self.steps, 1):
            params = ", ".join(f"{k}={_fmt_param(v)}" for k, v in s.parameters)
            tail = f" ({params})" if params else ""
            lines.append(f"{i:2d}. [{s.phase}] {s.name} ~{s.duration_min:g} min{tail}")
        lines.append(f"total ~{self.total_minutes:g} min")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps],
                "total_minutes": self.total_minutes}


def _fmt_param(v) -> str:
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def _print_minutes(board: BoardDesign, conductive: ToolProfile,
                   insulator: ToolProfile) -> float:
    """Coarse print-time estimate from deposited volume and per-material
    flow, plus a fixed cost per manual filament swap."""
    area = board.outline.area
    conductor_volume = sum(t.width * t.height *
                           _path_length(board, t) for t in board.traces)
    substrate_volume = max(area * board.depth - conductor_volume, 0.0)
    line_width = 0.45
    flow_insulator = line_width * 0.3 * insulator.print_speed      # mm^3/s
    flow_conductive = line_width * 0.3 * conductive.print_speed
    seconds = substrate_volume / flow_insulator + conductor_volume / flow_conductive
    swaps = 2 * (1 if board.traces else 0) + (2 if board.sockets or board.vias else 0)
    return round(seconds / 60.0 + 3.0 * swaps, 1)


def _path_length(board: BoardDesign, trace) -> float:
    from .layout import trace_length
    return trace_length(trace, board)


def plan_process(board: BoardDesign, report: DrcReport,
                 conductive: ToolProfile = CONDUCTIVE_TOOL,
                 insulator: ToolProfile = INSULATOR_PLA,
                 force: bool = False) -> ProcessPlan:
    """Build the fabrication plan. Refuses when the rule report carries
    errors, unless force=True (used by --force compilation)."""
    if report.error_count and not force:
        raise PlanError(f"refusing to plan around {report.error_count} rule "
                        "error(s); fix the design or force")

    steps: list[PlanStep] = [PlanStep(
        phase="print",
        name="print flat board (single extruder, manual filament swaps)",
        duration_min=_print_minutes(board, conductive, insulator),
        parameters=(
            ("bed_temp_c", BED_TEMP),
            ("insulator_temp_c", insulator.extruder_temp),
            ("insulator_speed_mm_s", insulator.print_speed),
            ("conductive_temp_c", conductive.extruder_temp),
            ("conductive_speed_mm_s", conductive.print_speed),
        ))]

    for bend in sorted(board.bends, key=lambda b: (b.sequence_index, b.id)):
        steps.append(PlanStep(
            phase="bend",
            name=f"hot-air bend {bend.id!r} to {bend.angle_deg:g} deg",
            duration_min=2.0,
            parameters=(
                ("air_temp_c", HOT_AIR_TEMP),
                ("angle_deg", bend.angle_deg),
                ("radius_mm", bend.radius),
                ("sequence", bend.sequence_index),
            )))

    if board.traces:
        fine = any(t.width <= FINE_TRACE_WIDTH for t in board.traces)
        scale = 2.0 if fine else 1.0
        for volts, minutes in PLATING_STAGES:
            note = "fine traces: doubled dwell" if fine else "standard dwell"
            steps.append(PlanStep(
                phase="plate",
                name=f"electroplate at constant {volts:g} V ({note})",
                duration_min=minutes * scale,
                parameters=(("voltage_v", volts), ("stir_rpm", STIR_RPM)),
            ))

    if board.traces or board.sockets:
        steps.append(PlanStep(
            phase="assemble",
            name="bond component leads with silver paste, then seal with glue",
            duration_min=PASTE_CURE_MINUTES,
            parameters=(("cure", "room temperature"),
                        ("cure_min", PASTE_CURE_MINUTES))))
    if board.sockets:
        steps.append(PlanStep(
            phase="assemble",
            name=f"press-fit header pins into {len(board.sockets)} socket(s)",
            duration_min=1.0 * len(board.sockets),
            parameters=(("sockets", len(board.sockets)),)))

    return ProcessPlan(steps=tuple(steps))
