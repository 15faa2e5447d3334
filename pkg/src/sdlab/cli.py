"""
Command-line entry point.

    sdlab run --config experiment.json [--out DIR] [--seed N]
    sdlab selfcheck [--out DIR] [--seed N]

Exit status 0 means every configured trend/tolerance assertion passed;
1 means at least one failed; 2 means the run could not be performed
(bad config, unwritable output directory, solver failure).
"""

import argparse
import sys

from .config import ConfigError, load_config, validate_config
from .experiments import run_experiment


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sdlab",
        description="numerical laboratory for singular stochastic "
                    "diffusion equations")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a configured experiment")
    run_p.add_argument("--config", required=True,
                       help="path to the JSON experiment config")
    run_p.add_argument("--out", default=None,
                       help="override the output directory")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
    run_p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering")

    chk_p = sub.add_parser("selfcheck",
                           help="run the fast invariant suite")
    chk_p.add_argument("--out", default="selfcheck-out")
    chk_p.add_argument("--seed", type=int, default=None)
    chk_p.add_argument("--no-figures", action="store_true")

    args = parser.parse_args(argv)

    try:
        if args.command == "selfcheck":
            cfg = validate_config({"experiment": "selfcheck",
                                   "grid": {"n": 32}})
        else:
            cfg = load_config(args.config)
        if args.seed is not None:
            cfg.noise["master_seed"] = int(args.seed)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2

    try:
        result, written = run_experiment(
            cfg, out_dir=args.out, make_figures=not args.no_figures)
    except Exception as exc:  # solver/IO failures abort with context
        print("sdlab: experiment aborted: %s" % exc, file=sys.stderr)
        return 2

    for name, ok in result.assertions.items():
        print("[%s] %s" % ("PASS" if ok else "FAIL", name))
    print("artifacts:")
    for path in written:
        print("  " + path)
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
