"""Command line entry point: `kinetics run <config>`, `kinetics verify`, `kinetics fit-constants <config>`.

Exit codes: 0 success, 2 configuration error, 3 numerical-budget failure or a check outside its band.
"""
import argparse
import logging
import sys
from typing import List

from cognite.kinetics._client import KineticsClient
from cognite.kinetics.config import load_experiment_config
from cognite.kinetics.exceptions import BudgetFailure, ConfigError, InvalidArgument

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinetics", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default KINETICS_MAX_WORKERS or 4)")
    parser.add_argument("--out", default=None, help="output directory, overrides [output] dir")
    parser.add_argument("--seed", type=int, default=None, help="base seed, overrides [experiment] seed")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest="command", required=True)
    run = commands.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config", help="path of the experiment config")
    commands.add_parser("verify", help="run the property suite on a small grid")
    fit = commands.add_parser("fit-constants", help="search the Lyapunov constants for a config")
    fit.add_argument("config", help="path of the experiment config")
    return parser


def _configure_logging(verbosity: int):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=logging.WARNING, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    logging.getLogger("cognite.kinetics").setLevel(level)


def main(argv: List[str] = None) -> int:
    args = _parser().parse_args(argv)
    _configure_logging(args.verbose)
    config = None
    try:
        if args.command in ("run", "fit-constants"):
            config = load_experiment_config(args.config)
            if args.seed is not None:
                config.experiment["seed"] = args.seed
        seed = config.seed if config is not None else args.seed
        overrides = {key: config.tolerances[key] for key in config.overrides} if config is not None else None
        client = KineticsClient(max_workers=args.threads, seed=seed, tolerances=overrides)
    except (ConfigError, InvalidArgument) as e:
        print(f"kinetics: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "run":
            manifest = client.experiments.run_experiment(config, out_dir=args.out)
            passed = manifest.passed
        elif args.command == "fit-constants":
            passed = client.experiments.fit_constants(config, out_dir=args.out).passed
        else:
            checks = client.experiments.verify(out_dir=args.out or "out")
            for name in checks.failures():
                print(f"kinetics: check {name} failed", file=sys.stderr)
            passed = checks.passed
    except (ConfigError, InvalidArgument) as e:
        print(f"kinetics: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetFailure as e:
        print(f"kinetics: {e}", file=sys.stderr)
        return EXIT_BUDGET
    if not passed:
        logger.warning("Run finished outside its acceptance band, see the manifest")
        return EXIT_BUDGET
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
