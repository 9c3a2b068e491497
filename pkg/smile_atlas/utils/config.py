"""
Run configuration for the CLI.

A run is described by one TOML file plus command-line overrides:

    schema_version = 1

    [model]
    model = "nig"          # bs | merton | nig | fmls | synthetic
    alpha = 2.0
    beta = -0.5
    delta = 1.0
    T = 1.0

    [grid]
    k_min = 0.5            # wing distances k > 0
    k_max = 40.0           # default: 200 for synthetic, 50 otherwise
    k_points = 40
    spacing = "geometric"  # or "linear"
    # values = [...]       # explicit grid; signed log-strikes for `smile`

    [run]
    side = "right"
    variant = "iv_doubleprime"   # defaults to the variant of the tail kind
    tail_source = "model"        # model | legendre | numeric
    tail_kind = "cdf_tail"       # numeric tails: density | cdf_tail | price
    as_printed = false           # FMLS tail constant without (α-1)/α

    [termstructure]
    k = 1.0
    T = [0.25, 0.5, 1.0, 2.0, 4.0]

Synthetic models take `[model.right]` and `[model.left]` tables with
log_c, power, linear, stretch and rho. Unknown keys are rejected.
"""

import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from smile_atlas.models.model_spec import ModelSpec, parse_model_spec
from smile_atlas.models.tails import Side, TailKind, Variant
from smile_atlas.utils.errors import ConfigError
from smile_atlas.utils.logging import get_logger

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = get_logger(__name__)

SCHEMA_VERSION = 1

# Row data written by every comparison-style command, in this order.
CSV_COLUMNS = ["k", "log_price", "total_vol", "slope", "asymptote_slope", "ratio", "epsilon1", "quad_err"]

DEFAULT_K_MIN = 0.5
DEFAULT_K_POINTS = 40
DEFAULT_K_MAX = 50.0
SYNTHETIC_K_MAX = 200.0

TailSource = Literal["model", "legendre", "numeric"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Section):
    k_min: float = Field(DEFAULT_K_MIN, gt=0)
    k_max: Optional[float] = Field(None, gt=0)
    k_points: int = Field(DEFAULT_K_POINTS, ge=1)
    spacing: Literal["geometric", "linear"] = "geometric"
    values: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_range(self) -> "GridConfig":
        if self.k_max is not None and self.k_max < self.k_min:
            raise ValueError(f"k_max={self.k_max} is below k_min={self.k_min}")
        return self


class RunSection(_Section):
    side: Side = "right"
    variant: Optional[Variant] = None
    tail_source: TailSource = "model"
    tail_kind: TailKind = "cdf_tail"
    as_printed: bool = False


class TermStructureConfig(_Section):
    k: float = 1.0
    T: List[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0, 4.0], min_length=1)

    @field_validator("T")
    @classmethod
    def _ascending(cls, values: List[float]) -> List[float]:
        if any(t <= 0.0 for t in values):
            raise ValueError("maturities must be positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("maturities must be strictly ascending")
        return values


class RunConfig(_Section):
    """Validated run description; `model` is the parsed ModelSpec."""

    schema_version: int = SCHEMA_VERSION
    model: ModelSpec
    grid: GridConfig = Field(default_factory=GridConfig)
    run: RunSection = Field(default_factory=RunSection)
    termstructure: TermStructureConfig = Field(default_factory=TermStructureConfig)

    @field_validator("schema_version")
    @classmethod
    def _known_schema(cls, v: int) -> int:
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {v}; this build reads {SCHEMA_VERSION}")
        return v

    @field_validator("model", mode="before")
    @classmethod
    def _parse_model(cls, v: Any) -> Any:
        if isinstance(v, Mapping):
            return parse_model_spec(dict(v))
        return v

    def wing_grid(self) -> np.ndarray:
        """Positive wing distances, ascending."""
        if self.grid.values is not None:
            distances = np.abs(np.asarray(self.grid.values, dtype=float))
            return np.unique(distances[distances > 0.0])
        k_max = self.grid.k_max
        if k_max is None:
            k_max = SYNTHETIC_K_MAX if self.model.family == "synthetic" else DEFAULT_K_MAX
        n = self.grid.k_points
        if n == 1 or k_max == self.grid.k_min:
            return np.array([self.grid.k_min])
        if self.grid.spacing == "geometric":
            return np.geomspace(self.grid.k_min, k_max, n)
        return np.linspace(self.grid.k_min, k_max, n)

    def strike_grid(self) -> np.ndarray:
        """Signed log-strikes: explicit `values` verbatim, else the wing grid on `run.side`."""
        if self.grid.values is not None:
            return np.sort(np.asarray(self.grid.values, dtype=float))
        sign = 1.0 if self.run.side == "right" else -1.0
        return np.sort(sign * self.wing_grid())


def _parse_value(raw: str) -> Any:
    """TOML scalar or array; bare words fall back to strings."""
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def _set_dotted(data: Dict[str, Any], dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override '{dotted}' descends into non-table key '{key}'")
        node = child
    node[keys[-1]] = value


def parse_overrides(pairs: Sequence[str]) -> Dict[str, Any]:
    """`section.key=value` strings -> nested mapping."""
    out: Dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override '{pair}' is not of the form section.key=value")
        key, raw = pair.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"override '{pair}' has an empty key")
        _set_dotted(out, key, _parse_value(raw.strip()))
    return out


def _merge(base: Dict[str, Any], extra: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _merge(dict(merged[key]), value)
        else:
            merged[key] = value
    return merged


def load_run_config(
    path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Read a TOML run file (if given), apply nested overrides on top and
    validate. Any failure surfaces as ConfigError.
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read run config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"run config {path} is not valid TOML: {exc}") from exc
        logger.debug("loaded run config %s", path)
    if overrides:
        data = _merge(data, overrides)
    if "model" not in data:
        raise ConfigError("run config has no [model] section (use --config or --model)")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid run config: {exc}") from exc
