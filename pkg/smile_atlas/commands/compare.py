"""`compare`: numeric smile against the tail-wing asymptote."""

import argparse

from smile_atlas.commands.common import add_run_arguments, build_config, write_report
from smile_atlas.services.harness import run_compare
from smile_atlas.utils.config import CSV_COLUMNS
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)


def run(args: argparse.Namespace) -> int:
    report = run_compare(build_config(args))
    summary = report.summary
    logger.info(
        "compare finished: final ratio %s, trend %s, duality gap %s, %d refusal(s)",
        "n/a" if summary.final_ratio is None else f"{summary.final_ratio:.6g}",
        summary.trend,
        "n/a" if summary.duality_gap is None else f"{summary.duality_gap:.3g}",
        len(report.refusals),
    )
    write_report(args, report, [row.model_dump() for row in report.rows], CSV_COLUMNS)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("compare", help="numeric smile vs. wing asymptote")
    add_run_arguments(parser, variant=True)
    parser.set_defaults(handler=run)
