"""`termstructure`: total variance along maturities at a fixed log-strike."""

import argparse

from smile_atlas.commands.common import add_run_arguments, build_config, write_report
from smile_atlas.services.harness import run_termstructure

COLUMNS = ["T", "log_price", "total_variance", "psi_price"]


def run(args: argparse.Namespace) -> int:
    if args.k is not None:
        args.overrides.append(f"termstructure.k={args.k!r}")
    if args.maturities:
        listed = ", ".join(repr(t) for t in args.maturities)
        args.overrides.append(f"termstructure.T=[{listed}]")
    table = run_termstructure(build_config(args))
    write_report(args, table, [row.model_dump() for row in table.rows], COLUMNS)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("termstructure", help="monotonicity of total variance in T")
    add_run_arguments(parser, grid=False)
    parser.add_argument("--k", type=float, default=None, help="log-strike (default 1.0)")
    parser.add_argument("--maturities", type=float, nargs="+", default=None, metavar="T")
    parser.set_defaults(handler=run)
