"""Command-line entry point.

    semilinear solve CONFIG
    semilinear converge CONFIG --levels N
    semilinear verify [--only 1 5 10]

Exit codes: 0 ok, 1 validation error, 2 solver failure, 3 check failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import OUTPUT_DIR_ENV, load_config
from .errors import ConfigError
from .output import write_json
from .run import EXIT_CHECK, EXIT_OK, EXIT_VALIDATION, run_converge, run_solve

log = logging.getLogger("semilinear")


def _validation_failure(exc, config_path):
    """stderr message plus a best-effort JSON error report."""
    print(f"error: {exc}", file=sys.stderr)
    out = os.environ.get(OUTPUT_DIR_ENV)
    if out is None:
        out = Path(config_path).parent / "output"
        try:
            data = json.loads(Path(config_path).read_text())
            d = data.get("output", {}).get("dir")
            if isinstance(d, str):
                out = Path(d) if Path(d).is_absolute() else Path(config_path).parent / d
        except (OSError, ValueError, AttributeError):
            pass
    report = {"status": "validation_error", "exit_code": EXIT_VALIDATION, "message": str(exc),
              "field": getattr(exc, "field", None)}
    try:
        write_json(Path(out) / "report.json", report)
    except OSError as err:
        log.warning("could not write error report: %s", err)
    return EXIT_VALIDATION


def cmd_solve(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _validation_failure(exc, args.config)
    res = run_solve(cfg)
    rep = res.report
    if res.exit_code == EXIT_OK:
        solve = rep["solve"]
        print(f"converged: sup|u| = {solve['sup_abs_u']:.6g}, "
              f"Newton iterations {solve['total_newton_iterations']}, {res.wall_time:.2f}s")
        if "exact_solution_error" in rep:
            print(f"max |u - log r| = {rep['exact_solution_error']:.3e}")
    elif res.exit_code == EXIT_VALIDATION:
        print(f"error: {rep['message']}", file=sys.stderr)
    else:
        print(f"{rep['status']}: {rep.get('message', rep.get('failed_checks'))}", file=sys.stderr)
    for name, chk in rep.get("checks", {}).items():
        print(f"  {name:<22s} {chk['status']:<12s} {chk['details']}")
    print(f"report: {res.files.get('report_json')}")
    return res.exit_code


def cmd_converge(args):
    try:
        cfg = load_config(args.config)
        res = run_converge(cfg, args.levels)
    except ConfigError as exc:
        return _validation_failure(exc, args.config)
    rep = res.report
    if res.exit_code != EXIT_OK:
        print(f"{rep['status']}: {rep.get('message')}", file=sys.stderr)
        return res.exit_code
    print(f"{'h':>10s} {'error':>12s} {'order':>7s}   ({rep['kind']})")
    for row in rep["levels"]:
        order = "" if row["order"] is None else f"{row['order']:.3f}"
        print(f"{row['h']:10.5g} {row['error']:12.4e} {order:>7s}")
    return EXIT_OK


def cmd_verify(args):
    from .acceptance import run_suite

    results = run_suite(only=set(args.only) if args.only else None)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if failed:
        print(f"failing criteria: {failed}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="semilinear",
                                description="Finite-difference solver for "
                                            "Δu = ε⁻²(eᵘ − r²e⁻ᵘ) with Dirichlet data.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="solve one configuration and run its checks")
    s.add_argument("config", help="JSON configuration file")
    s.set_defaults(func=cmd_solve)
    c = sub.add_parser("converge", help="grid-refinement study")
    c.add_argument("config")
    c.add_argument("--levels", type=int, default=3, help="number of grids h, h/2, ... (>= 2)")
    c.set_defaults(func=cmd_converge)
    v = sub.add_parser("verify", help="run the built-in acceptance suite")
    v.add_argument("--only", type=int, nargs="+", metavar="N", help="criterion numbers to run")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
