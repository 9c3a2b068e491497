"""`asymptote`: the predicted wing slope on a grid, no pricing."""

import argparse

from smile_atlas.commands.common import add_run_arguments, build_config, write_report
from smile_atlas.services.harness import run_asymptote

COLUMNS = ["k", "psi_argument", "asymptote_slope", "clamped"]


def run(args: argparse.Namespace) -> int:
    table = run_asymptote(build_config(args))
    write_report(args, table, [row.model_dump() for row in table.rows], COLUMNS)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("asymptote", help="tail-wing asymptote of a model")
    add_run_arguments(parser, variant=True)
    parser.set_defaults(handler=run)
