"""Command line: ``swarmfs <command> --config run.yaml [options]``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 one or more
models failed while the rest of the run completed.
"""
import argparse
import logging
import sys

from swarmfs import __version__, config
from swarmfs.errors import ConfigError, DataError
from swarmfs.pipeline import Pipeline

COMMANDS = ("preprocess", "baseline", "optimize", "crossval", "stats", "explain", "report", "run")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_PARTIAL = 0, 1, 2, 3


def build_parser():
    parser = argparse.ArgumentParser(prog="swarmfs", description="PSO wrapper feature selection pipeline")
    parser.add_argument("--version", action="version", version=f"swarmfs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--seed", help="master seed (unsigned 64-bit); overrides the config")
        p.add_argument("--out", help="output directory; overrides the config")
        p.add_argument("--eval-mode", choices=("paper", "validation"),
                       help="score particles on the test split (paper) or on a split of the training rows")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for model-level work")
        p.add_argument("--quiet", action="store_true")
        if name == "run":
            p.add_argument("--all", action="store_true", required=True, help="run every stage then the report")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(asctime)s %(message)s", datefmt="%H:%M:%S")
    try:
        cfg = config.load(args.config).with_overrides(seed=args.seed, out=args.out, eval_mode=args.eval_mode)
        pipe = Pipeline(cfg, jobs=args.jobs)
        if args.command == "run":
            pipe.run_all()
        else:
            getattr(pipe, args.command)()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if pipe.failures:
        print(f"completed with failures: {', '.join(pipe.failures)}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
