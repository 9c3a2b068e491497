"""`smile`: price and invert a grid of log-strikes."""

import argparse

from smile_atlas.commands.common import add_run_arguments, build_config, write_report
from smile_atlas.services.harness import run_smile
from smile_atlas.utils.config import CSV_COLUMNS


def run(args: argparse.Namespace) -> int:
    curve = run_smile(build_config(args))
    rows = [point.model_dump() for point in curve.points]
    write_report(args, curve, rows, CSV_COLUMNS, meta_exclude=("points",))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("smile", help="numerically priced smile curve")
    add_run_arguments(parser)
    parser.set_defaults(handler=run)
