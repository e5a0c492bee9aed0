#!/usr/bin/env python3
"""
MEGAN reaction prediction
Retrosynthesis and forward synthesis as sequences of molecular-graph edits

Usage:
    python main.py preprocess raw_train.csv raw_val.csv raw_test.csv --out data/retro
    python main.py train data/retro --out runs/retro [--resume]
    python main.py predict runs/retro/best.npz raw_test.csv --out runs/retro/test.pred --beam 50
    python main.py evaluate runs/retro/test.pred raw_test.csv --out runs/retro/eval --xlsx
"""

import argparse
import logging
import sys
from typing import List, Optional

from chem.exceptions import ChemError
from cli.commands import EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE, evaluate, predict, preprocess, train
from config.config_file import check_config, load_config_file
from config.exceptions import ConfigError
from config.run_config import ORDERINGS, RunConfig
from data.exceptions import DataError
from numcore.exceptions import NumericError
from utilities.utilities import LockError

logger = logging.getLogger(__name__)

PRESETS = {
    'retro-50k': RunConfig.retro_uspto_50k,
    'forward-mit': RunConfig.forward_uspto_mit,
    'retro-full': RunConfig.retro_uspto_full,
    'smoke': RunConfig.smoke,
}


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="typed key/value config file")
    common.add_argument("--preset", choices=sorted(PRESETS), default="retro-50k")
    common.add_argument("--seed", type=int)
    common.add_argument("--direction", choices=("retro", "forward"))
    common.add_argument("--ordering", choices=ORDERINGS)
    common.add_argument("--beam", type=int, metavar="W")
    common.add_argument("--max-steps", type=int, metavar="S")
    common.add_argument("--reaction-type-prior", action="store_true", help="add the reaction-class embedding")
    common.add_argument("--workers", type=int)
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true")
    verbosity.add_argument("--quiet", action="store_true", help="warnings only, no progress bars")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _ArgumentParser(prog="megan", description=__doc__.strip().splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = commands.add_parser("preprocess", parents=[common], help="mapped reactions -> sample archives")
    p.add_argument("inputs", nargs="+", help="CSV/TSV reaction tables")
    p.add_argument("--out", required=True, help="output directory")

    t = commands.add_parser("train", parents=[common], help="teacher-forced training")
    t.add_argument("data_dir", help="preprocess output directory")
    t.add_argument("--out", required=True, help="checkpoint directory")
    t.add_argument("--resume", action="store_true", help="continue from <out>/last.npz")

    r = commands.add_parser("predict", parents=[common], help="beam-search predictions")
    r.add_argument("checkpoint")
    r.add_argument("inputs", help="reaction table or one molecule per line")
    r.add_argument("--out", required=True, help="predictions file")

    e = commands.add_parser("evaluate", parents=[common], help="top-k accuracy")
    e.add_argument("predictions")
    e.add_argument("truth", help="reaction table with the ground truth")
    e.add_argument("--out", required=True, help="metrics directory")
    e.add_argument("--xlsx", action="store_true", help="also write metrics.xlsx")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Preset, then config file, then command-line flags."""
    config = PRESETS[args.preset]()
    if args.config:
        config = load_config_file(args.config, base=config)
    if args.seed is not None:
        config.seed = args.seed
    if args.direction is not None:
        config.direction = args.direction
    if args.ordering is not None:
        config.ordering = args.ordering
    if args.beam is not None:
        config.beam_width = args.beam
    if args.max_steps is not None:
        config.max_steps = args.max_steps
    if args.reaction_type_prior:
        config.model.use_reaction_type = True
    if args.workers is not None:
        config.workers = args.workers
    return check_config(config.sync())


def run(args: argparse.Namespace) -> int:
    config = build_config(args)
    show_progress = not args.quiet
    if args.command == "preprocess":
        return preprocess(args.inputs, args.out, config, show_progress)
    if args.command == "train":
        return train(args.data_dir, args.out, config, resume=args.resume, show_progress=show_progress)
    if args.command == "predict":
        return predict(args.checkpoint, args.inputs, args.out, config, args.beam, args.max_steps, show_progress)
    return evaluate(args.predictions, args.truth, args.out, config, xlsx=args.xlsx, show_progress=show_progress)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        return run(args)
    except ConfigError as exc:
        logger.error(f"Configuration error: {exc}")
        return EXIT_USAGE
    except (DataError, ChemError, LockError, FileNotFoundError, ValueError) as exc:
        logger.error(f"Data error: {exc}")
        return EXIT_DATA
    except NumericError as exc:
        logger.error(f"Numeric failure ({exc.reason}): {exc}")
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
