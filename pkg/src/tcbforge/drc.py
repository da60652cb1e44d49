"""Design rule checking and electrical estimation.

Rules and reference numbers come from measured behavior of copper-plated
conductive-PLA boards: the 0.5 mm print floor of a 0.4 mm nozzle, the
flat-trace conductivities before/after plating, the bent-trace resistance
ratios, the 18.46 degree plating-fracture deflection, and the 30 C surface
temperature at the 5 A reference current.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import GeometryError
from .geometry import point_segment_distance, segment_segment_distance
from .layout import (
    SOCKET_WALL,
    BoardDesign,
    Trace,
    derive_nets,
    net_of_elements,
    trace_length,
    trace_positions,
    validate_design,
)

ERROR = "error"
WARNING = "warning"
INFO = "info"
_SEVERITY_RANK = {INFO: 0, WARNING: 1, ERROR: 2}


@dataclass(frozen=True)
class MaterialProfile:
    """Electrical and print properties of the conductive filament."""

    name: str
    conductivity_unplated: float   # S/m
    conductivity_plated: float     # S/m
    print_temp: float              # C
    print_speed: float             # mm/s
    glass_transition: float        # C

    def __post_init__(self) -> None:
        if self.conductivity_unplated <= 0:
            raise GeometryError("unplated conductivity must be positive")
        if self.conductivity_plated <= self.conductivity_unplated:
            raise GeometryError("plated conductivity must exceed unplated")

    def conductivity(self, plated: bool) -> float:
        return self.conductivity_plated if plated else self.conductivity_unplated


CONDUCTIVE_PLA = MaterialProfile(
    name="copper-filled PLA",
    conductivity_unplated=7.54e3,
    conductivity_plated=7.69e5,
    print_temp=150.0,
    print_speed=10.0,
    glass_transition=60.0,
)


@dataclass(frozen=True)
class BendPenaltyTable:
    """Resistance multiplier vs fold angle, from the measured 50 mm samples:
    unplated 10.2/10.6/10.9/15.7 ohm and plated 0.1/0.2/0.2/0.2 ohm at
    0/15/45/90 degrees. Linear interpolation between entries, clamped at the
    ends. The plated step to 2.0 is resolution-limited (0.1 ohm meter digit)
    and deliberately coarse."""

    unplated: tuple[tuple[float, float], ...] = (
        (0.0, 1.0), (15.0, 10.6 / 10.2), (45.0, 10.9 / 10.2), (90.0, 15.7 / 10.2))
    plated: tuple[tuple[float, float], ...] = (
        (0.0, 1.0), (15.0, 2.0), (45.0, 2.0), (90.0, 2.0))

    def __post_init__(self) -> None:
        for entries in (self.unplated, self.plated):
            if not entries or entries[0] != (0.0, 1.0):
                raise GeometryError("penalty table must start at (0, 1.0)")
            angles = [a for a, _ in entries]
            mults = [m for _, m in entries]
            if angles != sorted(angles) or len(set(angles)) != len(angles):
                raise GeometryError("penalty angles must strictly increase")
            if any(b < a for a, b in zip(mults, mults[1:])):
                raise GeometryError("penalty multipliers must be non-decreasing")

    def factor(self, angle_deg: float, plated: bool) -> float:
        entries = self.plated if plated else self.unplated
        a = abs(angle_deg)
        if a <= entries[0][0]:
            return entries[0][1]
        for (a0, m0), (a1, m1) in zip(entries, entries[1:]):
            if a <= a1:
                t = (a - a0) / (a1 - a0)
                return m0 + t * (m1 - m0)
        return entries[-1][1]


# sub-0.8 mm gaps still take an 0603 chip (1.5 x 0.8 mm) bridged across them
SMD_0603_MAX_GAP = 0.8


@dataclass(frozen=True)
class DrcConfig:
    min_trace_width: float = 0.5          # print floor of a 0.4 mm nozzle
    min_spacing: float = 0.5
    fracture_deflection: float = 18.46    # deg; plating cracks beyond this
    fracture_strain: float = 0.0110       # most conservative measured sample
    current_reference: float = 5.0        # A, gives ~30 C surface temperature
    reference_surface_temp: float = 30.0  # C
    unplated_current_limit: float = 0.5   # A; unplated traces run ~100x hotter
    material: MaterialProfile = CONDUCTIVE_PLA
    penalties: BendPenaltyTable = field(default_factory=BendPenaltyTable)

    def __post_init__(self) -> None:
        for name in ("min_trace_width", "min_spacing", "fracture_deflection",
                     "fracture_strain", "current_reference",
                     "unplated_current_limit"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"{name} must be positive")

    def with_overrides(self, overrides: dict[str, float]) -> "DrcConfig":
        unknown = [k for k in overrides if k not in self.__dataclass_fields__
                   or k in ("material", "penalties")]
        if unknown:
            raise GeometryError(f"unknown rule setting(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


@dataclass(frozen=True)
class DrcFinding:
    rule: str
    severity: str
    elements: tuple[str, ...]
    message: str
    evidence: tuple[tuple[str, float], ...] = ()
    grid_index: tuple[int, int] | None = None

    def sort_key(self):
        return (self.rule, self.elements, self.message)

    def format(self) -> str:
        ev = ", ".join(f"{k}={v:g}" for k, v in self.evidence)
        where = ",".join(self.elements)
        tail = f" [{ev}]" if ev else ""
        return f"{self.severity.upper():7s} {self.rule:24s} {where}: {self.message}{tail}"


@dataclass(frozen=True)
class DrcReport:
    findings: tuple[DrcFinding, ...]

    @property
    def passed(self) -> bool:
        return self.error_count == 0

    @property
    def error_count(self) -> int:
        return sum(1 for f in self.findings if f.severity == ERROR)

    @property
    def warning_count(self) -> int:
        return sum(1 for f in self.findings if f.severity == WARNING)

    @property
    def info_count(self) -> int:
        return sum(1 for f in self.findings if f.severity == INFO)

    def errors(self) -> list[DrcFinding]:
        return [f for f in self.findings if f.severity == ERROR]

    def to_text(self) -> str:
        if not self.findings:
            return "drc: clean\n"
        lines = [f.format() for f in self.findings]
        lines.append(f"drc: {self.error_count} error(s), "
                     f"{self.warning_count} warning(s), {self.info_count} info")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "summary": {"errors": self.error_count, "warnings": self.warning_count,
                        "infos": self.info_count},
            "findings": [{
                "rule": f.rule,
                "severity": f.severity,
                "elements": list(f.elements),
                "message": f.message,
                "evidence": {k: v for k, v in f.evidence},
                "grid_index": list(f.grid_index) if f.grid_index else None,
            } for f in self.findings],
        }


def _sorted_report(findings) -> tuple[DrcFinding, ...]:
    return tuple(sorted(findings, key=DrcFinding.sort_key))


# ---------------------------------------------------------------------------
# resistance model
# ---------------------------------------------------------------------------

def _axis_crossings(trace: Trace, board: BoardDesign, bend) -> int:
    """How many times the trace's path crosses the bend's (full-width) axis."""
    dx, dy = bend.direction
    normal = (-dy, dx)
    signs = []
    for x, y in trace_positions(trace, board):
        s = (x - bend.start[0]) * normal[0] + (y - bend.start[1]) * normal[1]
        if abs(s) > 1e-9:
            signs.append(1 if s > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def estimate_trace_resistance(trace: Trace, board: BoardDesign, plated: bool,
                              cfg: DrcConfig | None = None) -> float:
    """End-to-end resistance in ohms: R = L / (sigma * w * h), compounded by
    the bend penalty for every axis crossing."""
    cfg = cfg or DrcConfig()
    area = trace.width * trace.height
    if area <= 1e-9:
        raise GeometryError(f"trace {trace.id!r} has (near) zero cross-section")
    sigma = cfg.material.conductivity(plated)
    length = trace_length(trace, board)
    r = 1000.0 * length / (sigma * area)  # mm, mm^2 and S/m -> ohms
    for bend in board.bends:
        crossings = _axis_crossings(trace, board, bend)
        if crossings:
            r *= cfg.penalties.factor(bend.angle_deg, plated) ** crossings
    return r


# ---------------------------------------------------------------------------
# geometry rules
# ---------------------------------------------------------------------------

def _conductor_primitives(board: BoardDesign):
    """(element_id, layer, kind, geometry, half_width) for every conductor.
    kind is 'path' (list of segments) or 'disc' (center, radius)."""
    prims = []
    for t in board.traces:
        pts = trace_positions(t, board)
        segs = list(zip(pts, pts[1:]))
        prims.append((t.id, t.layer, "path", segs, t.width / 2.0))
    for v in board.vias:
        pos = board.grid.position_of(v.at)
        for layer in ("top", "bottom"):
            prims.append((v.id, layer, "disc", (pos, v.radius), 0.0))
    for s in board.sockets:
        pos = board.grid.position_of(s.at)
        prims.append((s.id, s.layer, "disc", (pos, s.radius + SOCKET_WALL), 0.0))
    return prims


def _socket_nets(board: BoardDesign, nets: dict[str, str]) -> dict[str, str]:
    """Sockets join the net that owns their grid point, or float alone."""
    owner: dict[tuple[str, tuple[int, int]], str] = {}
    for t in board.traces:
        for p in t.path:
            owner.setdefault((t.layer, p), nets[t.id])
    for v in board.vias:
        for layer in ("top", "bottom"):
            owner.setdefault((layer, v.at), nets[v.id])
    result = dict(nets)
    for s in board.sockets:
        result[s.id] = owner.get((s.layer, s.at), f"socket:{s.id}")
    return result


def _pair_clearance(a, b) -> float:
    """Edge-to-edge clearance between two conductor primitives."""
    _, _, kind_a, geo_a, hw_a = a
    _, _, kind_b, geo_b, hw_b = b
    if kind_a == "disc" and kind_b == "disc":
        (ca, ra), (cb, rb) = geo_a, geo_b
        d = math.hypot(ca[0] - cb[0], ca[1] - cb[1])
        return d - ra - rb
    if kind_a == "disc":
        kind_a, geo_a, hw_a, kind_b, geo_b, hw_b = kind_b, geo_b, hw_b, kind_a, geo_a, hw_a
    if kind_b == "disc":
        center, radius = geo_b
        d = min(point_segment_distance(center, p, q) for p, q in geo_a)
        return d - hw_a - radius
    d = min(segment_segment_distance(p1, q1, p2, q2)
            for p1, q1 in geo_a for p2, q2 in geo_b)
    return d - hw_a - hw_b


def check_geometry(board: BoardDesign, cfg: DrcConfig | None = None) -> list[DrcFinding]:
    """Trace-width floor and distinct-net clearance, edge to edge."""
    cfg = cfg or DrcConfig()
    findings: list[DrcFinding] = []

    for t in board.traces:
        if t.width < cfg.min_trace_width:
            findings.append(DrcFinding(
                rule="geom.trace-width", severity=ERROR, elements=(t.id,),
                message=f"width {t.width:g} mm is below the printable floor "
                        f"{cfg.min_trace_width:g} mm",
                evidence=(("width", t.width), ("min_width", cfg.min_trace_width)),
                grid_index=t.path[0]))

    nets = _socket_nets(board, net_of_elements(board))
    prims = _conductor_primitives(board)
    reported: dict[tuple[str, str], float] = {}
    for i in range(len(prims)):
        for j in range(i + 1, len(prims)):
            a, b = prims[i], prims[j]
            if a[0] == b[0] or a[1] != b[1]:
                continue
            if nets.get(a[0]) == nets.get(b[0]):
                continue
            clearance = _pair_clearance(a, b)
            pair = tuple(sorted((a[0], b[0])))
            if pair not in reported or clearance < reported[pair]:
                reported[pair] = clearance

    for (id_a, id_b), clearance in sorted(reported.items()):
        if clearance < cfg.min_spacing:
            findings.append(DrcFinding(
                rule="geom.spacing", severity=ERROR, elements=(id_a, id_b),
                message=f"clearance {clearance:.3f} mm between distinct nets is "
                        f"below {cfg.min_spacing:g} mm",
                evidence=(("clearance", clearance), ("min_spacing", cfg.min_spacing))))
        elif 0.5 <= clearance < SMD_0603_MAX_GAP:
            findings.append(DrcFinding(
                rule="geom.spacing-0603", severity=INFO, elements=(id_a, id_b),
                message=f"gap {clearance:.3f} mm takes an 0603 chip bridged "
                        "across the two nets",
                evidence=(("clearance", clearance),)))
    return findings


# ---------------------------------------------------------------------------
# flex-zone rules
# ---------------------------------------------------------------------------

def exceeds_fracture_strain(strain: float, cfg: DrcConfig | None = None) -> bool:
    """Compare a computed flexural strain against the plating fracture limit."""
    cfg = cfg or DrcConfig()
    return strain >= cfg.fracture_strain


def _zone_direction(zone, board: BoardDesign) -> float | None:
    """Deflection (curvature) direction for a flex zone: the explicit value
    when set, otherwise perpendicular to the first bend axis crossing the
    zone."""
    if zone.direction_deg is not None:
        return zone.direction_deg
    for bend in sorted(board.bends, key=lambda b: (b.sequence_index, b.id)):
        if point_segment_distance(zone.center, bend.start, bend.end) <= zone.radius:
            dx, dy = bend.direction
            return math.degrees(math.atan2(dx, -dy))  # perpendicular to the axis
    return None


def _traces_in_zone(zone, board: BoardDesign) -> list[tuple[Trace, list]]:
    result = []
    for t in board.traces:
        pts = trace_positions(t, board)
        inside = [(p, q) for p, q in zip(pts, pts[1:])
                  if point_segment_distance(zone.center, p, q) <= zone.radius]
        if inside:
            result.append((t, inside))
    return result


def check_flex(board: BoardDesign, cfg: DrcConfig | None = None) -> list[DrcFinding]:
    """Plating-fracture risk where traces run through flex zones."""
    cfg = cfg or DrcConfig()
    findings: list[DrcFinding] = []
    for zone in board.flex_zones:
        crossing = _traces_in_zone(zone, board)
        if not crossing:
            continue
        deflection = zone.expected_deflection_deg
        for t, segments in crossing:
            if deflection >= cfg.fracture_deflection:
                findings.append(DrcFinding(
                    rule="flex.fracture", severity=ERROR, elements=(zone.id, t.id),
                    message=f"expected deflection {deflection:g} deg reaches the "
                            f"plating fracture limit {cfg.fracture_deflection:g} deg",
                    evidence=(("deflection", deflection),
                              ("limit", cfg.fracture_deflection))))
            elif deflection >= 0.8 * cfg.fracture_deflection:
                findings.append(DrcFinding(
                    rule="flex.near-fracture", severity=WARNING,
                    elements=(zone.id, t.id),
                    message=f"expected deflection {deflection:g} deg is within 20% "
                            f"of the fracture limit {cfg.fracture_deflection:g} deg",
                    evidence=(("deflection", deflection),
                              ("limit", cfg.fracture_deflection))))
            direction = _zone_direction(zone, board)
            if direction is None:
                continue
            for p, q in segments:
                seg_angle = math.degrees(math.atan2(q[1] - p[1], q[0] - p[0]))
                diff = abs((seg_angle - direction + 90.0) % 180.0 - 90.0)
                if diff <= 15.0:
                    findings.append(DrcFinding(
                        rule="flex.orientation", severity=INFO,
                        elements=(zone.id, t.id),
                        message="trace runs parallel to the deflection direction; "
                                "consider reorienting it across the flexing motion",
                        evidence=(("angle_offset", diff),)))
                    break
    return findings


# ---------------------------------------------------------------------------
# current rules
# ---------------------------------------------------------------------------

def check_current(board: BoardDesign, currents: dict[str, float],
                  cfg: DrcConfig | None = None, plated: bool = True) -> list[DrcFinding]:
    """Ampacity assessment of assigned trace currents.

    plated=True judges the finished (electroplated) board; plated=False
    judges bare conductive PLA, which at ~100x the resistance overheats well
    below one ampere.
    """
    cfg = cfg or DrcConfig()
    findings: list[DrcFinding] = []
    for tid in sorted(currents):
        amps = float(currents[tid])
        if amps < 0:
            raise GeometryError(f"current for {tid!r} must be >= 0, got {amps}")
        trace = board.trace_by_id(tid)
        if trace is None:
            findings.append(DrcFinding(
                rule="current.unknown-trace", severity=ERROR, elements=(tid,),
                message=f"current assigned to unknown trace {tid!r}",
                evidence=(("current", amps),)))
            continue
        resistance = estimate_trace_resistance(trace, board, plated, cfg)
        evidence = (("current", amps), ("resistance", resistance),
                    ("power", amps * amps * resistance))
        if not plated:
            if amps > cfg.unplated_current_limit:
                findings.append(DrcFinding(
                    rule="current.unplated-overload", severity=ERROR,
                    elements=(tid,),
                    message=f"{amps:g} A through an unplated trace exceeds the "
                            f"{cfg.unplated_current_limit:g} A safety limit; "
                            "joule heating can burn the conductive PLA",
                    evidence=evidence))
            else:
                findings.append(DrcFinding(
                    rule="current.unplated-ok", severity=INFO, elements=(tid,),
                    message=f"{amps:g} A within the unplated safety limit",
                    evidence=evidence))
        elif amps > cfg.current_reference:
            findings.append(DrcFinding(
                rule="current.above-reference", severity=WARNING, elements=(tid,),
                message=f"{amps:g} A exceeds the {cfg.current_reference:g} A "
                        "measured reference point; thermal behavior unverified",
                evidence=evidence))
        else:
            findings.append(DrcFinding(
                rule="current.plated-ok", severity=INFO, elements=(tid,),
                message=f"{amps:g} A is within the measured range (surface "
                        f"reaches ~{cfg.reference_surface_temp:g} C at "
                        f"{cfg.current_reference:g} A)",
                evidence=evidence))
    return findings


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

def run_drc(board: BoardDesign, cfg: DrcConfig | None = None,
            currents: dict[str, float] | None = None,
            plated: bool = True) -> DrcReport:
    """Structural validation plus every rule check, deterministically ordered.

    Structural errors short-circuit the rule checks (their geometry lookups
    need a sound board). Per-trace resistance estimates (plated and unplated)
    ride along as info entries.
    """
    cfg = cfg or DrcConfig()
    structural = validate_design(board)
    if structural:
        findings = [DrcFinding(rule=f"structure.{s.kind}", severity=ERROR,
                               elements=(s.element_id,) if s.element_id else (),
                               message=s.message)
                    for s in structural]
        return DrcReport(findings=_sorted_report(findings))

    findings = []
    findings.extend(check_geometry(board, cfg))
    findings.extend(check_flex(board, cfg))
    if currents:
        findings.extend(check_current(board, currents, cfg, plated=plated))
    for t in board.traces:
        findings.append(DrcFinding(
            rule="resist.trace", severity=INFO, elements=(t.id,),
            message="estimated end-to-end resistance",
            evidence=(("unplated_ohms",
                       estimate_trace_resistance(t, board, False, cfg)),
                      ("plated_ohms",
                       estimate_trace_resistance(t, board, True, cfg)),
                      ("length_mm", trace_length(t, board)))))
    depth = board.depth
    for b in board.bends:
        findings.append(DrcFinding(
            rule="thermoform.bend-strain", severity=INFO, elements=(b.id,),
            message="outer-fiber strain of the fold",
            evidence=(("strain", depth / (2.0 * b.radius)),
                      ("radius", b.radius))))
    return DrcReport(findings=_sorted_report(findings))
