"""`legendre`: Chernoff bounds against the numeric log-tail."""

import argparse

from smile_atlas.commands.common import add_run_arguments, build_config, write_report
from smile_atlas.services.harness import run_legendre

COLUMNS = ["k", "z_star", "K_at_z", "log_tail_bound", "numeric_log_tail", "boundary"]


def run(args: argparse.Namespace) -> int:
    table = run_legendre(build_config(args))
    rows = [
        {**row.model_dump(), "numeric_log_tail": numeric}
        for row, numeric in zip(table.rows, table.numeric_log_tail)
    ]
    write_report(args, table, rows, COLUMNS, meta_exclude=("rows", "numeric_log_tail"))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("legendre", help="Fenchel-Legendre tail bounds")
    add_run_arguments(parser)
    parser.set_defaults(handler=run)
