"""Command-line front end: run one experiment or sweep a parameter.

Two subcommands, both reading the same flat key=value config format:

    tsnlab run <config> [key=value ...]
    tsnlab sweep <name> <config> [key=value ...]

Trailing ``key=value`` arguments override the file; ``--seed``, ``--noise``
and ``--out-dir`` are shorthands for the overrides people reach for most.
A config that cannot describe a runnable experiment is reported on stderr
and exits with status 2 before anything is written.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import harness
from .harness import ConfigError


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("config", help="key=value config file")
    sub.add_argument("overrides", nargs="*", metavar="key=value",
                     help="settings that override the file")
    sub.add_argument("--seed", type=int, default=None,
                     help="base seed (repetition i runs with seed+i)")
    sub.add_argument("--noise", choices=harness.NOISE_PROFILES, default=None,
                     help="latency profile to run under")
    sub.add_argument("--out-dir", default="out",
                     help="directory for results (default: ./out)")
    sub.add_argument("--trace", action="store_true",
                     help="write a per-value trace.jsonl for every repetition")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsnlab",
        description="cyclic pub/sub experiments over simulated 1 GbE")
    commands = parser.add_subparsers(dest="command", required=True)

    run_p = commands.add_parser("run", help="execute one config")
    _add_common(run_p)

    sweep_p = commands.add_parser("sweep", help="vary one parameter")
    sweep_p.add_argument("name", choices=sorted(harness.SWEEP_VALUES),
                         help="which parameter list to sweep")
    _add_common(sweep_p)
    return parser


def _load_config(args) -> harness.ExperimentConfig:
    overrides: List[str] = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.noise is not None:
        overrides.append(f"noise={args.noise}")
    return harness.parse_config(args.config, overrides)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "run":
            run_dir, summaries = harness.run(cfg, args.out_dir, trace=args.trace)
            for s in summaries:
                print(f"seed {s.seed}: rtt {s.rtt_mean_us:.3f} us, "
                      f"drops {s.drops.d_sigma:.4f} %, "
                      f"jitter {s.jitter.mean_abs_us:.3f} us")
            print(f"wrote {run_dir}/summary.csv")
        else:
            path, rows = harness.sweep(args.name, cfg, args.out_dir,
                                       trace=args.trace)
            param = harness._SWEEP_PARAM[args.name]
            for row in rows:
                print(f"{param}={row[param]}: rtt {row['rtt_us']:.3f} us, "
                      f"drops {row['d_sigma_pct']:.4f} %")
            print(f"wrote {path}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
