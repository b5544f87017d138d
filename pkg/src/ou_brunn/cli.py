"""Command line entry point ``ou-brunn``.

    ou-brunn <experiment> [--config PATH] [--out DIR] [--seed N] [--jobs K]
    ou-brunn suite        [--config PATH] [--out DIR] [--seed N] [--jobs K]
    ou-brunn eigen --body LITERAL --h H [H ...] [--out DIR]

Exit codes: 0 all assertions hold, 1 an assertion failed, 2 solver or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, default_config_path, experiments_in, parse_body
from .experiments import EXIT_ERROR, EXIT_OK, exit_code, run_suite, write_report
from .grid import converged_eigenvalue, solve_body, write_eigenfunction_csv


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ou-brunn", description="Gaussian principal frequency experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("suite",):
        s = sub.add_parser(name, help="run every configured experiment" if name == "suite" else f"run {name}")
        s.add_argument("--config", type=Path, default=None, help="INI config (default: bundled desk.ini)")
        s.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        s.add_argument("--seed", type=int, default=None, help="override [run] seed")
        s.add_argument("--jobs", type=int, default=None, help="worker processes")
        s.add_argument("--eigenfunctions", action="store_true",
                       help="also write eigenfunction_<case>.csv (logconc)")
    e = sub.add_parser("eigen", help="one-off eigenvalue solve")
    e.add_argument("--body", required=True, help="body literal, e.g. 'ball{1.0}'")
    e.add_argument("--h", type=float, nargs="+", required=True,
                   help="spacing, or three or more decreasing spacings for an error budget")
    e.add_argument("--tol", type=float, default=1e-10)
    e.add_argument("--out", type=Path, default=None, help="write eigenfunction.csv here")
    return p


def _eigen(args) -> int:
    body = parse_body(args.body)
    hs = args.h
    res = solve_body(body, hs[-1], args.tol)
    out = {"body": args.body, "h": hs[-1], "lambda": res.lam, "iterations": res.iterations,
           "residual": res.residual, "nodes": res.u.grid.size}
    if len(hs) >= 3:
        lam, bud = converged_eigenvalue(body, hs, args.tol)
        out.update({"eps": bud.eps, "order": bud.order})
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_eigenfunction_csv(res.u, args.out / "eigenfunction.csv")
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "eigen":
            return _eigen(args)
        path = args.config or default_config_path()
        names = experiments_in(path) if args.command == "suite" else [args.command]
        if not names:
            raise ConfigError(f"{path} configures no experiment")
        dump = None
        if args.eigenfunctions:
            dump = args.out
            dump.mkdir(parents=True, exist_ok=True)
        reports = run_suite(path, names, seed=args.seed, jobs=args.jobs, dump=dump)
    except (ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    write_report(reports, args.out)
    for name, rep in reports.items():
        s = rep.summary
        worst = "n/a" if s["worst_margin"] is None else f"{s['worst_margin']:.3g}"
        print(f"{name}: {s['cases']} cases, {s['failures']} failures, {s['errors']} errors, worst margin {worst}")
    return exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())
