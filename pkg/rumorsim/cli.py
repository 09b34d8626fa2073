"""Command-line entry point: one subcommand per experiment."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .config import DEFAULT_INIT, Experiment, ExperimentConfig, Model, default_contestant_laws, default_lmr_laws
from .errors import RumorSimError
from .harness import run

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML experiment file")
    common.add_argument("--model", choices=[m.value for m in Model], help="model when no config file is given")
    common.add_argument("--seed", type=int, help="base seed (overrides config and RUMORSIM_SEED)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--threads", type=int, help="worker threads for replications")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")

    parser = argparse.ArgumentParser(
        prog="rumorsim",
        description="Simulate and verify non-Markovian rumor models with contestants.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for experiment in Experiment:
        sub.add_parser(experiment.value, parents=[common], help=f"run the {experiment.value} experiment")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults), then environment, then flags."""
    experiment = Experiment(args.experiment)
    if args.config:
        config = ExperimentConfig.from_file(args.config)
        if args.model and Model(args.model) is not config.model:
            logger.warning("--model %s ignored; %s sets model %s", args.model, args.config, config.model.value)
        config = replace(config, experiment=experiment)
    else:
        model = Model(args.model or Model.CONTESTANT.value)
        laws = default_lmr_laws() if model is Model.LMR else default_contestant_laws()
        config = ExperimentConfig(laws=laws, model=model, experiment=experiment, init=DEFAULT_INIT[model])
    config = config.from_env()
    return config.with_overrides(seed=args.seed, out=args.out, threads=args.threads)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        config = load_config(args)
        report = run(config)
    except RumorSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(report.to_text())
    return 0 if report.verdict else 1


if __name__ == "__main__":
    sys.exit(main())
