"""`regvar`: regular-variation index of a model tail, with Bingham ratios."""

import argparse

from smile_atlas.commands.common import add_run_arguments, build_config, write_report
from smile_atlas.services.harness import run_regvar

COLUMNS = ["x", "g", "transform", "ratio"]


def run(args: argparse.Namespace) -> int:
    if args.tail_kind is not None:
        args.overrides.append(f'run.tail_kind="{args.tail_kind}"')
    report = run_regvar(build_config(args))
    write_report(args, report, [row.model_dump() for row in report.bingham], COLUMNS, meta_exclude=("bingham",))
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("regvar", help="regular-variation diagnostics of a tail")
    add_run_arguments(parser, variant=True)
    parser.add_argument("--tail-kind", choices=("density", "cdf_tail", "price"), default=None)
    parser.set_defaults(handler=run)
