"""CLI entrypoint and subcommand wiring."""

import argparse
import json
import sys
from typing import List, Optional

from pydantic import ValidationError

from smile_atlas import __version__
from smile_atlas.commands import asymptote, compare, legendre, regvar, smile, termstructure
from smile_atlas.utils.errors import SmileAtlasError
from smile_atlas.utils.logging import get_logger

logger = get_logger("smile_atlas.cli")

COMMANDS = (smile, asymptote, compare, termstructure, regvar, legendre)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smile-atlas",
        description="Implied-volatility smile wings: numeric smiles against tail-wing asymptotics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def _fail(payload: dict, exit_code: int) -> int:
    sys.stderr.write(json.dumps(payload) + "\n")
    return exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; exit 0 ok, 2 config error, 3 condition gate, 4 numerical failure."""
    args = build_parser().parse_args(argv)
    logger.info("smile-atlas %s: %s", __version__, args.command)
    try:
        code = args.handler(args)
    except SmileAtlasError as exc:
        logger.info("%s refused: %s", args.command, exc)
        return _fail(exc.to_dict(), exc.exit_code)
    except ValidationError as exc:
        return _fail({"error": "ValidationError", "detail": str(exc)}, 2)
    logger.info("%s finished", args.command)
    return code


if __name__ == "__main__":
    sys.exit(main())
