"""Command-line entry point.

Subcommands:
  validate  run the distribution/bound validation suite
  run       single (N, P) cell Monte Carlo
  sweep     full (N, P) grid Monte Carlo
  report    sweep plus rendered figures (or re-render from a summary)

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import load_config
from .errors import ConfigError
from .results import emit_results, load_results
from .sweep import run_sweep
from .validate import all_passed, format_report, run_validation_suite


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmimo",
        description="Monte Carlo simulator for limited-feedback MIMO downlink scheduling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="run the validation suite")
    p_val.add_argument("--seed", type=int, default=0)
    p_val.add_argument("--budget", type=int, default=100_000,
                       help="base sample count per check")
    p_val.add_argument("--out", default=None, help="directory for the text report")

    for name, help_text in [
        ("run", "run a single (N, P) cell"),
        ("sweep", "run the full (N, P) grid"),
        ("report", "run the grid and render figures"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=(name != "report"), default=None)
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default="out")
        p.add_argument("--workers", type=int, default=1)
        if name == "report":
            p.add_argument("--summary", default=None,
                           help="render from an existing summary JSON instead of re-running")
    return parser


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            checks = run_validation_suite(seed=args.seed, budget=args.budget)
            text = format_report(checks)
            print(text)
            if args.out:
                os.makedirs(args.out, exist_ok=True)
                with open(os.path.join(args.out, "validation.txt"), "w",
                          encoding="utf-8") as fh:
                    fh.write(text + "\n")
            return 0 if all_passed(checks) else 1

        if args.command in ("run", "sweep"):
            cfg = _load(args)
            if args.command == "run" and (len(cfg.N_grid) != 1 or len(cfg.P_grid) != 1):
                raise ConfigError(
                    "'run' expects a single-cell config (one N, one P); use 'sweep' for grids"
                )
            result = run_sweep(cfg, workers=args.workers)
            csv_path, json_path = emit_results(result, args.out)
            print(csv_path)
            print(json_path)
            return 0

        if args.command == "report":
            from .report import render_report

            if args.summary is not None:
                result = load_results(args.summary)
            else:
                if args.config is None:
                    raise ConfigError("report needs --config or --summary")
                result = run_sweep(_load(args), workers=args.workers)
            csv_path, json_path = emit_results(result, args.out)
            print(csv_path)
            print(json_path)
            for p in render_report(result, args.out):
                print(p)
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
