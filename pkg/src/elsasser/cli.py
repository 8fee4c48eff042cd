"""
Command line entry point ``elsasser``.

Exit codes: 0 success, 2 configuration error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .config import ConfigError, load_config
from .runner import (
    EXIT_ABORT,
    EXIT_CONFIG,
    EXIT_OK,
    SUITES,
    cmd_check_conditions,
    cmd_gen_data,
    cmd_inequality_suite,
    cmd_monitor,
    cmd_norms,
    cmd_run,
    cmd_sweep,
)


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="elsasser", description="Elsasser-variable MHD experiments on the 3-torus.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write the large-data initial pair as an ELSF checkpoint")
    p.add_argument("config", help="YAML run config")
    p.add_argument("-o", "--output", required=True, help="checkpoint path (.elsf); a .json sidecar is written next to it")

    p = sub.add_parser("check-conditions", help="evaluate the smallness conditions on the initial data")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="also write the reports to this JSON file")

    p = sub.add_parser("run", help="integrate a config into a run directory")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="run directory (default: output_dir from the config)")
    p.add_argument("--resume", action="store_true", help="continue from the latest checkpoint in the run directory")
    p.add_argument("--stop-after", type=int, help="stop after this many snapshots (leaves the run incomplete)")

    p = sub.add_parser("sweep", help="one run per value of a numeric config field")
    p.add_argument("config")
    p.add_argument("--axis", required=True, help="config key, or one of nu_plus, nu_minus, m")
    p.add_argument("--values", required=True, nargs="*", type=float, help="values for the axis")
    p.add_argument("-o", "--output", help="sweep directory (default: output_dir from the config)")
    p.add_argument("--workers", type=int, default=1, help="parallel runs (default 1)")

    p = sub.add_parser("monitor", help="recompute bootstrap traces of an existing run")
    p.add_argument("run_dir")
    p.add_argument("--config", help="config with alternative monitor constants (same physics)")

    p = sub.add_parser("inequality-suite", help="empirical constants of the harmonic-analysis inequalities")
    p.add_argument("-n", type=int, default=32, help="grid size (default 32)")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suite", action="append", choices=SUITES, help="suite to run (repeatable; default all)")
    p.add_argument("-o", "--output", required=True, help="output directory")

    p = sub.add_parser("norms", help="Besov and chi norms of the fields in a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("-p", type=float, default=6.0)
    p.add_argument("-r", type=float, default=1.0)
    p.add_argument("-s", type=float, help="regularity index (default 3/p - 1)")
    p.add_argument("--j-min", type=int, default=-2)
    p.add_argument("--j-max", type=int)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-data":
            _print_json(cmd_gen_data(load_config(args.config), args.output))
        elif args.command == "check-conditions":
            reports = cmd_check_conditions(load_config(args.config))
            if args.output:
                from .runner import write_json

                write_json(args.output, reports)
            for r in reports:
                mark = "ok" if r["verdict"] else "FAILS"
                print(f"{r['name']:<22} lhs={r['lhs']:.6g} threshold={r['threshold']:.6g} {mark}")
        elif args.command == "run":
            res = cmd_run(load_config(args.config), args.output, resume=args.resume, stop_after=args.stop_after)
            reason = res.manifest["abort_reason"]
            print(f"{res.run_dir}: " + (f"aborted ({reason}): {res.manifest['message']}" if reason else "done"))
            return res.exit_code
        elif args.command == "sweep":
            rows = cmd_sweep(load_config(args.config), args.axis, args.values, args.output, args.workers)
            for row in rows:
                print(f"{args.axis}={row[args.axis]} exit={row['exit_code']} {row['abort_reason']}")
            return EXIT_ABORT if any(r["exit_code"] == EXIT_ABORT for r in rows) else EXIT_OK
        elif args.command == "monitor":
            cfg = load_config(args.config) if args.config else None
            for t in cmd_monitor(args.run_dir, cfg):
                state = f"violated at t={t['first_violation']}" if t["violated"] else "held"
                print(f"{t['name']:<18} max/threshold={t['max_ratio']:.6g} {state}")
        elif args.command == "inequality-suite":
            for s in cmd_inequality_suite(args.n, args.samples, args.seed, args.output, args.suite or SUITES):
                print(f"{s['id']:<22} n={s['n']} samples={s['samples']} min={s['min']:.6g} "
                      f"median={s['median']:.6g} max={s['max']:.6g} {'PASS' if s['verdict'] else 'FAIL'}")
        elif args.command == "norms":
            _print_json(cmd_norms(args.checkpoint, args.j_min, args.j_max, args.p, args.r, args.s))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
