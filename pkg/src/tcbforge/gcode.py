"""Single-extruder multi-material G-code patching (Prusa/Marlin flavor).

A virtual-extruder slice emits plain ``T<n>`` tool changes. On a single
extruder those become: set the nozzle temperature for the incoming material
(M104), pause for the manual filament swap (M600), and remind the operator
to purge until the copper-based residue has visibly cleared. The first tool
selection before any extrusion only sets temperature. Everything else passes
through byte-for-byte, so patching an already-patched file changes nothing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import GcodeError

DIALECTS = ("prusa",)


@dataclass(frozen=True)
class ToolProfile:
    """Per-tool material settings for the patcher."""

    name: str
    extruder_temp: float      # C
    print_speed: float        # mm/s
    conductive: bool = False


INSULATOR_PLA = ToolProfile(name="PLA", extruder_temp=205.0, print_speed=45.0)
CONDUCTIVE_TOOL = ToolProfile(name="conductive PLA", extruder_temp=150.0,
                              print_speed=10.0, conductive=True)

DEFAULT_TOOL_PROFILES = {0: INSULATOR_PLA, 1: CONDUCTIVE_TOOL}

BED_TEMP = 55.0


@dataclass(frozen=True)
class GcodeOptions:
    dialect: str = "prusa"
    purge_reminder: bool = True
    speed_mode: str = "feedrate"   # "feedrate" rewrites F words; "m220" scales
    conductive_speed: float = 10.0  # mm/s

    def __post_init__(self) -> None:
        if self.dialect not in DIALECTS:
            raise GcodeError(f"unsupported dialect {self.dialect!r}")
        if self.speed_mode not in ("feedrate", "m220"):
            raise GcodeError(f"unknown speed mode {self.speed_mode!r}")


@dataclass(frozen=True)
class GcodeProgram:
    """Raw program text split into lines (terminators preserved) plus the
    tool-change events found in it."""

    lines: tuple[str, ...]
    tool_events: tuple[tuple[int, int], ...]  # (line index, tool id)

    def text(self) -> str:
        return "".join(self.lines)


_TOOL_RE = re.compile(r"^T(\d+)\s*$")
_EXTRUDE_RE = re.compile(r"^G[0123]\b[^;]*\bE-?\d")
_FEED_RE = re.compile(r"\bF(\d+(?:\.\d+)?)")
_MOVE_RE = re.compile(r"^G[0123]\b")


def _code_part(line: str) -> str:
    return line.split(";", 1)[0].strip()


def parse_gcode(text: str) -> GcodeProgram:
    lines = tuple(text.splitlines(keepends=True))
    events = []
    for i, line in enumerate(lines):
        m = _TOOL_RE.match(_code_part(line))
        if m:
            events.append((i, int(m.group(1))))
    return GcodeProgram(lines=lines, tool_events=tuple(events))


PURGE_REMINDER = (
    "; PURGE CHECK: extrude until the copper-based residue is fully cleared\n"
    ";              and clean material flows before resuming\n"
)


def patch_gcode(program: GcodeProgram,
                profiles: dict[int, ToolProfile] | None = None,
                options: GcodeOptions | None = None) -> GcodeProgram:
    """Replace every tool-change line with the manual-swap block and slow
    conductive segments to the profile speed. Idempotent; all untouched
    input lines survive byte-for-byte in order."""
    profiles = DEFAULT_TOOL_PROFILES if profiles is None else profiles
    options = options or GcodeOptions()

    target_feed = options.conductive_speed * 60.0  # mm/min
    out: list[str] = []
    extrusion_seen = False
    current: ToolProfile | None = None
    previous: ToolProfile | None = None

    for index, line in enumerate(program.lines):
        code = _code_part(line)
        m = _TOOL_RE.match(code)
        if m:
            tool = int(m.group(1))
            profile = profiles.get(tool)
            if profile is None:
                raise GcodeError(f"line {index + 1}: tool T{tool} has no "
                                 "material profile")
            previous, current = current, profile
            out.append(f"; tool change -> {profile.name} (T{tool})\n")
            out.append(f"M104 S{profile.extruder_temp:g}\n")
            if extrusion_seen:
                out.append("M600\n")
                if options.purge_reminder and previous is not None \
                        and previous.conductive and not profile.conductive:
                    out.append(PURGE_REMINDER)
            if options.speed_mode == "m220":
                if profile.conductive:
                    percent = round(100.0 * options.conductive_speed
                                    / INSULATOR_PLA.print_speed)
                    out.append(f"M220 S{percent}\n")
                else:
                    out.append("M220 S100\n")
            continue
        if _EXTRUDE_RE.match(code):
            extrusion_seen = True
        if (options.speed_mode == "feedrate" and current is not None
                and current.conductive and _MOVE_RE.match(code)):
            rewritten = _rewrite_feed(line, target_feed)
            out.append(rewritten)
            continue
        out.append(line)

    return parse_gcode("".join(out))


def _rewrite_feed(line: str, target: float) -> str:
    code, sep, comment = line.partition(";")

    def sub(m: re.Match) -> str:
        return f"F{target:g}"

    return _FEED_RE.sub(sub, code, count=1) + sep + comment


def describe_patch(before: GcodeProgram, after: GcodeProgram) -> str:
    """Human-readable diff summary for the CLI."""
    replaced = len(before.tool_events)
    if replaced == 0:
        if any("; tool change ->" in line for line in before.lines):
            return "already patched, no changes"
        return "no tool changes found; output is an identical copy"
    injected = sum(1 for line in after.lines if line.startswith("M104 "))
    pauses = sum(1 for line in after.lines if line.strip() == "M600")
    return (f"replaced {replaced} tool change(s); injected {injected} M104 "
            f"temperature set(s) and {pauses} M600 pause(s)")
