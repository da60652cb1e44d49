"""Shared builders for the test suite, including a seeded random generator
of structurally valid board designs."""

import random
import string

from tcbforge.geometry import BendLine, FlexZone, PlanarOutline, Stackup
from tcbforge.layout import BoardDesign, Socket, Trace, Via, validate_design


def simple_board(**overrides):
    base = dict(
        name="unit",
        outline=PlanarOutline.rectangle(40.0, 35.0),
        stackup=Stackup((0.3, 0.3, 0.3, 0.3)),
        pitch=2.54,
        margin=2.54,
    )
    base.update(overrides)
    return BoardDesign(**base)


def led_board(**overrides):
    """Two-sided LED loop mirrored by the bundled sample design."""
    return simple_board(
        name="led_demo",
        traces=(
            Trace("bot_gnd", "bottom", ((2, 2), (2, 10))),
            Trace("bot_vcc", "bottom", ((12, 2), (12, 10))),
            Trace("top_led", "top", ((2, 2), (12, 2))),
        ),
        vias=(Via("v1", (2, 2)), Via("v2", (12, 2))),
        sockets=(Socket("s_gnd", "bottom", (2, 10)), Socket("s_vcc", "bottom", (12, 10))),
        bends=(BendLine("fold", (-1.0, 17.5), (41.0, 17.5), 90.0, 3.0, 1),),
        **overrides,
    )


def fig4_trace_board(width=1.3, height=0.5, bend_angle=None):
    """50 mm straight trace with the measured cross-section; optionally one
    fold crossing it."""
    bends = ()
    if bend_angle is not None:
        bends = (BendLine("fold", (30.0, 21.0), (30.0, -1.0), bend_angle, 3.0, 1),)
    return BoardDesign(
        name="sample50",
        outline=PlanarOutline.rectangle(60.0, 20.0),
        stackup=Stackup((0.5, 0.25, 0.25, 0.5)),
        pitch=2.5,
        margin=2.5,
        traces=(Trace("dut", "top", ((0, 2), (20, 2)), width=width, height=height),),
        bends=bends,
    )


def _fresh_id(rng: random.Random, used: set[str], prefix: str) -> str:
    while True:
        suffix = "".join(rng.choices(string.ascii_lowercase, k=4))
        eid = f"{prefix}_{suffix}"
        if eid not in used:
            used.add(eid)
            return eid


def _random_walk(rng: random.Random, indices: set, length: int):
    start = rng.choice(sorted(indices))
    path = [start]
    for _ in range(length):
        u, v = path[-1]
        steps = [(u + du, v + dv)
                 for du, dv in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))
                 if (u + du, v + dv) in indices and (u + du, v + dv) != path[-1]]
        if not steps:
            break
        path.append(rng.choice(steps))
    # drop immediate backtracks creating duplicate consecutive points
    cleaned = [path[0]]
    for p in path[1:]:
        if p != cleaned[-1]:
            cleaned.append(p)
    return cleaned


def random_board(rng: random.Random) -> BoardDesign:
    """A structurally valid design with random outline, elements and bends."""
    width = rng.uniform(25, 80)
    height = rng.uniform(25, 60)
    outline = PlanarOutline.rectangle(width, height)
    pitch = rng.choice([1.0, 1.27, 2.54])
    margin = rng.choice([pitch, 2.0])
    face = rng.choice([0.25, 0.3])
    stackup = Stackup((face, 0.3, 0.3, face))

    board = BoardDesign(name=f"rand{rng.randrange(10_000)}", outline=outline,
                        stackup=stackup, pitch=pitch, margin=margin)
    indices = {p.index for p in board.grid.points}
    used_ids: set[str] = set()

    traces = []
    for _ in range(rng.randrange(1, 6)):
        path = _random_walk(rng, indices, rng.randrange(2, 8))
        if len(path) < 2:
            continue
        traces.append(Trace(
            id=_fresh_id(rng, used_ids, "t"),
            layer=rng.choice(["top", "bottom"]),
            path=tuple(path),
            width=round(rng.uniform(0.5, 1.3), 3),
            height=round(rng.uniform(0.25, face), 3),
        ))

    free = sorted(indices)
    rng.shuffle(free)
    vias = tuple(Via(_fresh_id(rng, used_ids, "v"), free.pop(),
                     round(rng.uniform(0.4, 0.8), 3))
                 for _ in range(rng.randrange(0, 3)) if free)
    sockets = tuple(Socket(_fresh_id(rng, used_ids, "s"),
                           rng.choice(["top", "bottom"]), free.pop(),
                           round(rng.uniform(0.8, 1.2), 3),
                           round(rng.uniform(2.0, 3.0), 3))
                    for _ in range(rng.randrange(0, 3)) if free)

    bends = []
    if rng.random() < 0.7:
        xs = sorted(rng.sample(range(5, int(width) - 5), k=min(rng.randrange(1, 3),
                                                               max(1, int(width) - 10))))
        for i, x in enumerate(xs):
            bends.append(BendLine(
                id=_fresh_id(rng, used_ids, "b"),
                start=(float(x), height + 1.0),
                end=(float(x), -1.0),
                angle_deg=rng.choice([-90.0, -45.0, 30.0, 45.0, 90.0, 120.0]),
                radius=round(rng.uniform(stackup.total_depth, 6.0), 3),
                sequence_index=i + 1,
            ))

    zones = tuple(FlexZone(
        id=_fresh_id(rng, used_ids, "z"),
        center=(rng.uniform(5, width - 5), rng.uniform(5, height - 5)),
        radius=round(rng.uniform(2, 6), 3),
        expected_deflection_deg=round(rng.uniform(0, 25), 3),
        direction_deg=round(rng.uniform(0, 180), 3) if rng.random() < 0.5 else None,
    ) for _ in range(rng.randrange(0, 2)))

    board = board.replace(traces=tuple(traces), vias=vias, sockets=sockets,
                          bends=tuple(bends), flex_zones=zones)
    assert validate_design(board) == [], "generator must produce valid boards"
    return board
