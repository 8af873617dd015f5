"""Command line entry point.

Verbs::

    ecocorridor run SCENARIO [--ego K] [--composition C] [--range M] [--seed N]
                    [--steps FILE] [--summary FILE]
    ecocorridor sweep [MATRIX] --out FILE [--workers N]
    ecocorridor validate SCENARIO [SCENARIO ...]
    ecocorridor plotdata INPUT --series {position,velocity,acceleration} --out FILE

``SCENARIO`` is a path to a scenario TOML file or a bundled name
(``peachtree``, ``synthetic``). ``INPUT`` of ``plotdata`` is a scenario or a
step table CSV. Exit codes: 0 success, 2 validation failure, 3 runtime
violation (collision, red-light crossing or timeout).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .energy import summarize
from .errors import ScenarioParseError, ScenarioValidationError, SimulationTimeout
from .logio import read_step_table, write_log, write_table
from .scenario import COMPOSITIONS, parse_scenario, string_kinds
from .sweep import SUMMARY_HEADER, SweepMatrix, parse_matrix, resolve_route, run_sweep
from .traffic_sim import run_scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_VIOLATION = 3


def _load(name: str):
    return parse_scenario(resolve_route(name))


def _apply_overrides(sc, args):
    changes = {}
    if args.range is not None:
        changes["v2i_range"] = args.range
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.ego is not None or args.composition is not None:
        comp = args.composition or (sc.composition if sc.composition in COMPOSITIONS else "no_cav")
        ego = args.ego or sc.ego_kind
        changes["kinds"] = string_kinds(len(sc.kinds), ego, sc.ego_index, comp)
        changes["composition"] = comp
    return sc.with_(**changes) if changes else sc


def cmd_run(args) -> int:
    sc = _apply_overrides(_load(args.scenario), args)
    code = EXIT_OK
    try:
        log = run_scenario(sc)
    except SimulationTimeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        log = exc.log
        code = EXIT_VIOLATION
    if log.collisions or log.red_crossings:
        code = EXIT_VIOLATION
    if args.steps:
        write_log(log, args.steps, "step-table")
    if args.summary:
        write_log(log, args.summary, "summary")
    m = summarize(log)
    print(f"{sc.name} ego={sc.ego_kind} composition={sc.composition} range={sc.v2i_range:g} m "
          f"seed={sc.seed}: fuel {m.fuel:.2f} g, travel time {m.travel_time:.1f} s, "
          f"stops {m.stops}, collisions {log.collisions}, red crossings {log.red_crossings}")
    return code


def cmd_sweep(args) -> int:
    matrix = parse_matrix(args.matrix) if args.matrix else SweepMatrix()

    def progress(done, total):
        if args.verbose:
            print(f"  {done}/{total} runs", file=sys.stderr)

    rows = run_sweep(matrix, workers=args.workers, progress=progress)
    write_table(rows, SUMMARY_HEADER, args.out)
    flagged = [r for r in rows if r["flagged"]]
    print(f"{len(rows)} cells written to {args.out}, {len(flagged)} flagged")
    return EXIT_VIOLATION if flagged else EXIT_OK


def cmd_validate(args) -> int:
    for name in args.scenarios:
        sc = _load(name)
        print(f"{name}: ok ({len(sc.route.signals)} signals, {len(sc.kinds)} vehicles, "
              f"ego {sc.ego_kind} at {sc.ego_index})")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    src = Path(args.input)
    if src.suffix == ".csv":
        log = read_step_table(src)
    else:
        sc = _load(args.input)
        try:
            log = run_scenario(sc)
        except SimulationTimeout as exc:
            log = exc.log
    arr = {"position": log.s, "velocity": log.v, "acceleration": log.a}[args.series]
    n = arr.shape[1] if arr.ndim == 2 else 0
    header = ("t",) + tuple(f"veh{j}" for j in range(n)) + ("phases",)
    rows = []
    for k, t in enumerate(log.t):
        row = {"t": float(t), "phases": log.phases[k]}
        row.update({f"veh{j}": float(arr[k, j]) for j in range(n)})
        rows.append(row)
    write_table(rows, header, args.out)
    print(f"{args.series} series of {n} vehicles, {len(rows)} steps written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ecocorridor", description="Signalized-corridor eco-driving simulations.")
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("scenario")
    r.add_argument("--ego", choices=("HV", "AV", "CAV"))
    r.add_argument("--composition", choices=COMPOSITIONS)
    r.add_argument("--range", type=float, help="V2I range in meters")
    r.add_argument("--seed", type=int)
    r.add_argument("--steps", help="write the step table to this CSV file")
    r.add_argument("--summary", help="write per-vehicle metrics to this CSV file")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run an experiment matrix")
    s.add_argument("matrix", nargs="?", help="matrix TOML (default: full bundled matrix)")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int)
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="parse and validate scenario files")
    v.add_argument("scenarios", nargs="+")
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("plotdata", help="extract a plot-ready series table")
    d.add_argument("input")
    d.add_argument("--series", choices=("position", "velocity", "acceleration"), default="position")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioParseError, ScenarioValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
