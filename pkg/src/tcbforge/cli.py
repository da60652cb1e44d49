"""Command line entry point: tcbforge check|compile|gcode|plan|serve.

Exit codes are a stable contract: 0 pass, 1 rule/semantic failure, 2 parse
failure (including unreadable input), 3 output I/O failure, 4 environment
(e.g. port busy). Outputs carry no timestamps, so identical inputs give
identical files.
"""

from __future__ import annotations

import argparse
import errno
import json
import os
import sys

from .drc import DrcConfig, estimate_trace_resistance, run_drc
from .dsl import DslError, parse
from .errors import GcodeError, PlanError, SolidsError, TcbError
from .gcode import describe_patch, parse_gcode, patch_gcode
from .layout import BoardDesign
from .plan import plan_process
from .solids import generate_solids
from .stl_io import export_stl

EXIT_OK = 0
EXIT_RULES = 1
EXIT_PARSE = 2
EXIT_IO = 3
EXIT_ENV = 4


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_IO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcbforge",
        description="Design compiler and rule checker for thermoformed "
                    "3D-printed circuit boards.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_set=True):
        p.add_argument("file", help="board design (.tcb)")
        p.add_argument("--json", action="store_true", help="structured output")
        if with_set:
            p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                           help="override rule.<name> or assign current.<trace>")

    p_check = sub.add_parser("check", help="run the design rule checks")
    common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_compile = sub.add_parser("compile",
                               help="emit printable STL pair and process plan")
    common(p_compile)
    p_compile.add_argument("--out", default=".", metavar="DIR")
    p_compile.add_argument("--force", action="store_true",
                           help="write outputs even with rule errors")
    p_compile.set_defaults(func=cmd_compile)

    p_plan = sub.add_parser("plan", help="print the fabrication process plan")
    common(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_gcode = sub.add_parser("gcode",
                             help="patch tool changes for single-extruder swaps")
    p_gcode.add_argument("file", help="sliced G-code program")
    p_gcode.add_argument("--no-purge-comment", action="store_true",
                         help="skip the residue purge reminder block")
    p_gcode.add_argument("--speed-mode", choices=("feedrate", "m220"),
                         default="feedrate")
    p_gcode.set_defaults(func=cmd_gcode)

    p_serve = sub.add_parser("serve", help="serve the editor API on localhost")
    common(p_serve)
    p_serve.add_argument("--port", type=int, default=8337)
    p_serve.add_argument("--ui", default=None, metavar="DIR",
                         help="directory with the built browser editor")
    p_serve.set_defaults(func=cmd_serve)
    return parser


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

def _read_text(path: str) -> str | None:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return None


def _load_board(path: str) -> BoardDesign | int:
    text = _read_text(path)
    if text is None:
        return EXIT_PARSE
    try:
        return parse(text)
    except DslError as exc:
        for err in exc.errors:
            print(f"{path}:{err.span}: {err.message}", file=sys.stderr)
        for s in exc.structural:
            print(f"{path}: {s}", file=sys.stderr)
        return EXIT_PARSE


def _split_settings(pairs: list[str]):
    """--set rule.min_spacing=0.6 --set current.heat=2.52"""
    rules: dict[str, float] = {}
    currents: dict[str, float] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise TcbError(f"bad --set {pair!r}: expected KEY=VALUE")
        try:
            number = float(value)
        except ValueError:
            raise TcbError(f"bad --set {pair!r}: value must be numeric") from None
        domain, sep, name = key.partition(".")
        if not sep or not name:
            raise TcbError(f"bad --set {pair!r}: expected rule.<name> or "
                           "current.<trace>")
        if domain == "rule":
            rules[name] = number
        elif domain == "current":
            currents[name] = number
        else:
            raise TcbError(f"bad --set {pair!r}: unknown domain {domain!r}")
    return rules, currents


def _config_from(args) -> tuple[DrcConfig, dict[str, float]] | int:
    try:
        rules, currents = _split_settings(args.set)
        return DrcConfig().with_overrides(rules), currents
    except TcbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    board = _load_board(args.file)
    if isinstance(board, int):
        return board
    cfg_currents = _config_from(args)
    if isinstance(cfg_currents, int):
        return cfg_currents
    cfg, currents = cfg_currents
    report = run_drc(board, cfg, currents=currents or None)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.to_text(), end="")
    return EXIT_OK if report.passed else EXIT_RULES


def cmd_plan(args) -> int:
    board = _load_board(args.file)
    if isinstance(board, int):
        return board
    cfg_currents = _config_from(args)
    if isinstance(cfg_currents, int):
        return cfg_currents
    cfg, currents = cfg_currents
    report = run_drc(board, cfg, currents=currents or None)
    if not report.passed:
        print(report.to_text(), end="", file=sys.stderr)
        return EXIT_RULES
    plan = plan_process(board, report)
    if args.json:
        print(json.dumps(plan.to_dict(), indent=2))
    else:
        print(plan.to_text(), end="")
    return EXIT_OK


def cmd_compile(args) -> int:
    board = _load_board(args.file)
    if isinstance(board, int):
        return board
    cfg_currents = _config_from(args)
    if isinstance(cfg_currents, int):
        return cfg_currents
    cfg, currents = cfg_currents
    report = run_drc(board, cfg, currents=currents or None)
    failed = not report.passed
    if failed:
        print(report.to_text(), end="", file=sys.stderr)
        if not args.force:
            print("error: rule errors block compilation (use --force)",
                  file=sys.stderr)
            return EXIT_RULES

    try:
        solids = generate_solids(board, validate=not args.force)
        plan = plan_process(board, report, force=args.force)
    except (SolidsError, PlanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RULES

    try:
        os.makedirs(args.out, exist_ok=True)
        paths = {
            "substrate": os.path.join(args.out, f"{board.name}_substrate.stl"),
            "conductor": os.path.join(args.out, f"{board.name}_conductor.stl"),
            "plan": os.path.join(args.out, f"{board.name}_plan.txt"),
        }
        with open(paths["substrate"], "wb") as fh:
            fh.write(export_stl(solids.substrate))
        with open(paths["conductor"], "wb") as fh:
            fh.write(export_stl(solids.conductor))
        with open(paths["plan"], "w", encoding="utf-8", newline="") as fh:
            fh.write(plan.to_text())
    except OSError as exc:
        print(f"error: cannot write outputs: {exc.strerror}", file=sys.stderr)
        return EXIT_IO

    summary = {
        "design": board.name,
        "traces": len(board.traces),
        "substrate_volume_mm3": round(solids.substrate.volume(), 3),
        "conductor_volume_mm3": round(solids.conductor.volume(), 3),
        "resistances_ohm": {
            t.id: {"unplated": round(estimate_trace_resistance(t, board, False, cfg), 3),
                   "plated": round(estimate_trace_resistance(t, board, True, cfg), 4)}
            for t in board.traces},
        "files": paths,
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(f"{board.name}: {summary['traces']} trace(s), substrate "
              f"{summary['substrate_volume_mm3']} mm^3, conductor "
              f"{summary['conductor_volume_mm3']} mm^3")
        for tid, r in summary["resistances_ohm"].items():
            print(f"  {tid}: {r['unplated']} ohm unplated, "
                  f"{r['plated']} ohm plated")
        for label, path in paths.items():
            print(f"  wrote {label}: {path}")
    return EXIT_RULES if failed else EXIT_OK


def cmd_gcode(args) -> int:
    text = _read_text(args.file)
    if text is None:
        return EXIT_PARSE
    program = parse_gcode(text)
    from .gcode import GcodeOptions
    options = GcodeOptions(purge_reminder=not args.no_purge_comment,
                           speed_mode=args.speed_mode)
    try:
        patched = patch_gcode(program, options=options)
    except GcodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RULES

    stem = args.file[:-6] if args.file.endswith(".gcode") else args.file
    out_path = stem + ".tcb.gcode"
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(patched.text())
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    summary = describe_patch(program, patched)
    print(f"{summary}; wrote {out_path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    board = _load_board(args.file)
    if isinstance(board, int):
        return board
    cfg_currents = _config_from(args)
    if isinstance(cfg_currents, int):
        return cfg_currents
    cfg, currents = cfg_currents

    from .server import DesignService, make_server
    service = DesignService(board, path=args.file, cfg=cfg, currents=currents)
    try:
        server = make_server(service, port=args.port, ui_dir=args.ui)
    except OSError as exc:
        if exc.errno in (errno.EADDRINUSE, errno.EACCES):
            print(f"error: port {args.port} unavailable: {exc.strerror}",
                  file=sys.stderr)
            return EXIT_ENV
        raise
    host, port = server.server_address[:2]
    print(f"serving {board.name!r} on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
