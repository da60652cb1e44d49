"""Bundled sample designs."""

from importlib import resources

from ..dsl import parse
from ..layout import BoardDesign

NAMES = ("led_board", "hotwire_cutter")

# current assignments the hot-wire sample is operated at (supply side)
HOTWIRE_CURRENTS = {"supply_a": 2.52, "supply_b": 2.52}


def text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown sample {name!r}; available: {', '.join(NAMES)}")
    return (resources.files(__package__) / f"{name}.tcb").read_text(encoding="utf-8")


def load(name: str) -> BoardDesign:
    return parse(text(name))


def write_to(name: str, directory) -> str:
    """Copy a sample into a directory; returns the written path."""
    import os
    path = os.path.join(os.fspath(directory), f"{name}.tcb")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text(name))
    return path
