"""Command-line interface.

  robest run --config cfg.json [--out DIR] [--mode strict|precond]
             [--seed N] [--dt DT]
  robest scenarios --list
  robest check

Exit codes: 0 success, 2 precondition rejection, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import NumericalError, PreconditionError

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robest",
        description="Parametric robustness analysis of estimation error "
        "for linear dynamical systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="analyze scenarios from a JSON config")
    run_p.add_argument("--config", required=True, help="path to the JSON run config")
    run_p.add_argument("--out", default=None, help="output directory override")
    run_p.add_argument("--mode", choices=("strict", "precond"), default=None)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--dt", type=float, default=None)

    sc_p = sub.add_parser("scenarios", help="describe the built-in scenarios")
    sc_p.add_argument("--list", action="store_true", dest="list_them")

    sub.add_parser("check", help="run the fast self-check battery")
    return parser


def _cmd_run(args) -> int:
    from .report import run
    from .scenarios import load_config

    overrides = {
        "out": args.out,
        "mode": args.mode,
        "seed": args.seed,
        "dt": args.dt,
    }
    config = load_config(args.config, overrides)
    analyses = run(config)
    for an in analyses:
        r = an.metrics["ground_truth"].R
        print(f"{an.scenario.name}: R(ground truth) = {r:.6f}, mu = {an.mu:.4f}")
    print(f"wrote artifacts to {config.out_dir}")
    return 0


def _cmd_scenarios(_args) -> int:
    from .scenarios import builtin_scenarios

    for sc in builtin_scenarios():
        poi = ",".join(str(i) for i in sc.params_of_interest)
        print(
            f"{sc.name}: p={sc.spec.p}, N={sc.N:g}, params of interest [{poi}], "
            f"input {sc.input.kind}"
        )
    return 0


def _cmd_check(_args) -> int:
    from .check import run_checks

    return 0 if run_checks(verbose=True) else 3


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "scenarios":
            return _cmd_scenarios(args)
        return _cmd_check(args)
    except PreconditionError as exc:
        print(f"robest: precondition rejected: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"robest: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
