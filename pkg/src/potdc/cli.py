"""Command-line benchmark harness.

Subcommands: example1, example2, example3 (stock Monte-Carlo studies),
convexity (numerical convexity evidence for the inner value function),
selftest (oracle suites) and custom --config (INI-driven run).

Exit codes: 0 success, 1 config error, 2 acceptance/selftest failure,
3 solver infeasibility.
"""

import argparse
import sys

import numpy as np

from .errors import ConfigError, Infeasible, PotdcError
from .experiments import (example1_config, example2_config, example3_config,
                          load_config, run_experiment, write_csv,
                          write_sinr_svg)
from .selftest import SUITES, run_selftest

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURE = 2
EXIT_INFEASIBLE = 3


def _add_run_options(p):
    p.add_argument("--output", default=None, help="CSV output path")
    p.add_argument("--trials", type=int, default=None,
                   help="override the number of Monte-Carlo trials")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--snr", default=None,
                   help="comma-separated SNR grid in dB")
    p.add_argument("--svg", default=None,
                   help="also write a mean-SINR line chart to this path")
    p.add_argument("--quiet", action="store_true", help="suppress progress")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="potdc",
        description="Robust adaptive beamforming benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("example1", "example2", "example3"):
        p = sub.add_parser(name, help=f"run the stock {name} study")
        _add_run_options(p)

    p = sub.add_parser("custom", help="run a study described by a config file")
    p.add_argument("--config", required=True, help="INI config path")
    _add_run_options(p)

    p = sub.add_parser("convexity",
                       help="numerical convexity evidence for the inner value function")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--seed", type=int, default=1234)

    p = sub.add_parser("selftest", help="run the built-in oracle suites")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--fault", choices=SUITES, default=None,
                   help="deliberately break one suite (harness sanity check)")
    return parser


def _apply_overrides(factory, args, config_path=None):
    overrides = {}
    if args.trials is not None:
        overrides["num_trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.snr is not None:
        try:
            overrides["snr_db"] = tuple(
                float(t) for t in args.snr.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"--snr: cannot parse {args.snr!r}") from None
    if config_path is not None:
        cfg = load_config(config_path)
        if overrides:
            from dataclasses import replace
            cfg = replace(cfg, **overrides)
        return cfg
    return factory(**overrides)


def _run_study(cfg, args):
    out = args.output or f"{cfg.example}.csv"
    progress = None
    if not args.quiet:
        def progress(M, snr_db):
            print(f"  done M={M} snr={snr_db:g} dB", flush=True)
    records = run_experiment(cfg, progress=progress)
    write_csv(records, out)
    if not args.quiet:
        print(f"wrote {len(records)} rows to {out}")
    if args.svg:
        write_sinr_svg(records, args.svg)
        if not args.quiet:
            print(f"wrote chart to {args.svg}")
    return EXIT_OK


def _run_convexity(args):
    from .selftest import random_instance
    from .solver import convexity_check

    rng = np.random.default_rng(args.seed)
    worst = np.inf
    failures = 0
    for i in range(args.instances):
        M = int(rng.integers(3, 11))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        rep = convexity_check(R_hat, gamma, Q, eta, grid_size=args.grid)
        worst = min(worst, rep.min_second_difference)
        status = "ok" if rep.convex_consistent else "FAIL"
        print(f"instance {i:3d} M={M:2d}: min second difference "
              f"{rep.min_second_difference:+.3e}  [{status}]")
        if not rep.convex_consistent:
            failures += 1
    print(f"worst second difference over {args.instances} instances: {worst:+.3e}")
    if failures:
        print(f"{failures} instance(s) violated the convexity threshold")
        return EXIT_FAILURE
    print("convexity evidence: PASS")
    return EXIT_OK


def _run_selftest(args):
    results = run_selftest(level=args.level, seed=args.seed, fault=args.fault)
    failed = 0
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<12} {mark}  ({r.detail})")
        failed += not r.passed
    if failed:
        print(f"{failed} suite(s) failed")
        return EXIT_FAILURE
    print("all suites passed")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("example1", "example2", "example3"):
            factory = {"example1": example1_config, "example2": example2_config,
                       "example3": example3_config}[args.command]
            return _run_study(_apply_overrides(factory, args), args)
        if args.command == "custom":
            return _run_study(
                _apply_overrides(None, args, config_path=args.config), args)
        if args.command == "convexity":
            return _run_convexity(args)
        if args.command == "selftest":
            return _run_selftest(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Infeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PotdcError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
