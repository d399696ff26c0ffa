"""Command line entry point: ``sefpp run | validate | reproduce-tables``.

Exit codes for ``run``: 0 converged, 1 bad config, 2 iteration cap reached,
3 numerical failure. ``SEFPP_OUTPUT_DIR`` redirects trace files.
"""
import argparse
import logging
import os
import sys
import warnings
from pathlib import Path

from . import tables
from .config import ConfigError, load_config
from .errors import NumericalFailureError, RejectedInputError
from .solvers import CONVERGED, MAX_ITERS, solve
from .traceio import write_trace

log = logging.getLogger("sefpp")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MAX_ITERS = 2
EXIT_NUMERICAL = 3


def output_path(cfg_path, out):
    name = out.path or f"{Path(cfg_path).stem}.trace.{out.format}"
    override = os.environ.get("SEFPP_OUTPUT_DIR")
    if override:
        return Path(override) / Path(name).name
    return Path(name)


def cmd_run(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            trace = solve(cfg.problem, cfg.solver, cfg.solution)
        except NumericalFailureError as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        except RejectedInputError as exc:
            print(f"config error: solver: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    path = output_path(args.config, cfg.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_trace(trace, path, cfg.output.format, cfg.output.log_every)
    print(f"status: {trace.terminated_reason}")
    print(f"iterations: {max(len(trace) - 1, 0)}")
    if trace.records:
        # the start point itself can fail to evaluate, leaving no records
        last = trace.final
        print(f"coupling: {last.coupling:.17g}")
        print(f"fix_x: {last.fix_x:.17g}")
        print(f"fix_y: {last.fix_y:.17g}")
    print(f"trace: {path}")
    if trace.message:
        print(f"message: {trace.message}", file=sys.stderr)
    if trace.terminated_reason == CONVERGED:
        return EXIT_OK
    if trace.terminated_reason == MAX_ITERS:
        return EXIT_MAX_ITERS
    return EXIT_NUMERICAL


def cmd_validate(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    p = cfg.problem
    print(f"ok: mode={cfg.solver.mode} dims=({p.D1.domain_dim}, {p.D2.domain_dim}) -> {p.D1.codomain_dim}")
    return EXIT_OK


def cmd_tables(args):
    trace = tables.run_table(args.table_id)
    if args.table_id == 1:
        checks = tables.table1_checks(trace)
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status} {c.column}_{c.row}: computed={c.computed:.10f} published={c.published:.10f} "
                  f"diff={c.diff:.2e} tol={c.tolerance:.0e}")
        ok = all(c.passed for c in checks)
        print("table 1: pass" if ok else "table 1: FAIL")
        return EXIT_OK if ok else 1
    print("table 2: report only; the stated x-map has fixed point 3 while the table settles at 2")
    print(f"{'n':>4} {'x computed':>14} {'x published':>14} {'y computed':>14} {'y published':>14}")
    rows = sorted({1} | {r for r, _ in tables.TABLE2_PUBLISHED})
    for n in rows:
        rec = trace.by_index(n)
        px = tables.TABLE2_PUBLISHED.get((n, "x"))
        py = tables.TABLE2_PUBLISHED.get((n, "y"))
        fx = "" if px is None else f"{px:.9f}"
        fy = "" if py is None else f"{py:.9f}"
        print(f"{n:>4} {rec.x[0]:>14.9f} {fx:>14} {rec.y[0]:>14.9f} {fy:>14}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="sefpp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="solve the problem in a YAML config and write the trace")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("validate", help="parse and check a config without solving")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("reproduce-tables", help="regenerate a published iteration table")
    p.add_argument("table_id", type=int, choices=(1, 2))
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
