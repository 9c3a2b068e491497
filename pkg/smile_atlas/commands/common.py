"""Arguments and output plumbing shared by the subcommands."""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel

from smile_atlas.utils.config import RunConfig, load_run_config, parse_overrides
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)


def add_run_arguments(
    parser: argparse.ArgumentParser, *, variant: bool = False, grid: bool = True
) -> None:
    parser.add_argument("--config", type=Path, default=None, help="TOML run file")
    parser.add_argument("--model", default=None, help="model family: bs, merton, nig, fmls, synthetic")
    parser.add_argument("--side", choices=("right", "left"), default=None)
    if variant:
        parser.add_argument(
            "--variant", choices=("iv", "iv_prime", "iv_doubleprime", "v"), default=None,
            help="wing formula variant (default: the one matching the tail kind)",
        )
        parser.add_argument("--tail-source", choices=("model", "legendre", "numeric"), default=None)
    if grid:
        parser.add_argument("--k-min", type=float, default=None, help="smallest wing distance")
        parser.add_argument("--k-max", type=float, default=None, help="largest wing distance")
        parser.add_argument("--k-points", type=int, default=None)
    parser.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override a run-config value, e.g. model.sigma=0.2 (repeatable)",
    )


def build_config(args: argparse.Namespace) -> RunConfig:
    """Run file, then --set overrides, then the dedicated flags."""
    overrides: Dict[str, Any] = parse_overrides(args.overrides)
    if args.model is not None:
        overrides.setdefault("model", {})["model"] = args.model
    run_flags = {
        "side": args.side,
        "variant": getattr(args, "variant", None),
        "tail_source": getattr(args, "tail_source", None),
    }
    grid_flags = {
        "k_min": getattr(args, "k_min", None),
        "k_max": getattr(args, "k_max", None),
        "k_points": getattr(args, "k_points", None),
    }
    for section, flags in (("run", run_flags), ("grid", grid_flags)):
        values = {key: value for key, value in flags.items() if value is not None}
        if values:
            overrides.setdefault(section, {}).update(values)
    return load_run_config(args.config, overrides)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    logger.info("wrote %s", out)


def write_report(
    args: argparse.Namespace,
    report: BaseModel,
    rows: Sequence[Dict[str, Any]],
    columns: List[str],
    meta_exclude: Sequence[str] = ("rows",),
) -> None:
    """
    json: the whole report. csv: `rows` restricted to `columns`, plus a
    sidecar `<out>.json` with everything else when writing to a file.
    """
    if args.format == "json":
        _emit(report.model_dump_json(indent=2) + "\n", args.out)
        return
    frame = pd.DataFrame(list(rows), columns=columns)
    _emit(frame.to_csv(index=False), args.out)
    if args.out is not None:
        sidecar = args.out.with_suffix(".json")
        meta = report.model_dump(mode="json", exclude=set(meta_exclude))
        sidecar.write_text(json.dumps(meta, indent=2) + "\n")
        logger.info("wrote %s", sidecar)
