"""
Run orchestration behind the CLI subcommands.

Every `run_*` takes a validated RunConfig and returns a pydantic report.
Condition-gate failures of the requested wing propagate as
ConditionGateError; per-strike problems stay in the report as rows with a
status plus an entry in `refusals`.
"""

import math
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from smile_atlas.config import settings
from smile_atlas.models.model_spec import ModelSpec, describe_model
from smile_atlas.models.reports import (
    AsymptoteRow,
    AsymptoteTable,
    BinghamRow,
    ComparisonReport,
    ComparisonRow,
    ComparisonSummary,
    LegendreTable,
    RegVarReport,
    SmileCurve,
    SmilePoint,
    TermStructureRow,
    TermStructureTable,
)
from smile_atlas.models.tails import KIND_FOR_VARIANT, VARIANT_FOR_KIND, Side, TailFunction, WingAsymptote
from smile_atlas.services.blackscholes import implied_total_vol
from smile_atlas.services.legendre import legendre_bound, legendre_tail
from smile_atlas.services.model_zoo import critical_moments, known_tail_asymptote
from smile_atlas.services.pricing import price_otm, smile_curve, tail_cdf, tail_function
from smile_atlas.services.regvar import MIN_BINGHAM_INDEX, MIN_GRID_POINTS, bingham_ratio, estimate_index
from smile_atlas.services.wings import (
    implied_slope_from_price,
    lee_slope,
    left_wing,
    right_wing,
    sublinear_wing,
)
from smile_atlas.utils.config import RunConfig
from smile_atlas.utils.errors import ConfigError, InvalidInputError, SmileAtlasError
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)

# Bingham ratios are reported at this many of the largest grid points.
BINGHAM_POINTS = 4
# |ratio - 1| below this on the whole top half counts as a flat comparison.
FLAT_TOL = 1e-10


def _sign(side: Side) -> float:
    return 1.0 if side == "right" else -1.0


def _refusal(stage: str, exc: Exception, **extra: Any) -> Dict[str, Any]:
    payload = exc.to_dict() if isinstance(exc, SmileAtlasError) else {"error": type(exc).__name__, "detail": str(exc)}
    payload.update(stage=stage, **extra)
    return payload


# ---------------------------------------------------------------------------
# Tails and wings
# ---------------------------------------------------------------------------


def select_tail(cfg: RunConfig, side: Optional[Side] = None) -> TailFunction:
    """The tail the run compares against: closed-form, Legendre bound or numeric."""
    m = cfg.model
    side = side or cfg.run.side
    source = cfg.run.tail_source
    variant = cfg.run.variant
    if source == "model":
        tail = known_tail_asymptote(m, side, as_printed=cfg.run.as_printed)
    elif source == "legendre":
        tail = legendre_tail(m, side, k_min=0.0)
    else:
        kind = KIND_FOR_VARIANT[variant] if variant not in (None, "v") else cfg.run.tail_kind
        tail = tail_function(m, side, kind)
    if variant not in (None, "v") and KIND_FOR_VARIANT[variant] != tail.kind:
        raise ConfigError(
            f"variant {variant} needs a {KIND_FOR_VARIANT[variant]} tail, but the {source} "
            f"tail of the {m.family} model is a {tail.kind} (use variant "
            f"{VARIANT_FOR_KIND[tail.kind]} or v)"
        )
    return tail


def build_wing(cfg: RunConfig, tail: TailFunction, grid: np.ndarray) -> WingAsymptote:
    cond = critical_moments(cfg.model)
    if cfg.run.variant == "v":
        return sublinear_wing(tail, cond, grid)
    if tail.side == "right":
        return right_wing(tail, cond, grid)
    return left_wing(tail, cond, grid)


def _tail_grid(cfg: RunConfig, tail: TailFunction) -> np.ndarray:
    grid = cfg.wing_grid()
    inside = grid[grid >= tail.k_min]
    if inside.size == 0:
        raise ConfigError(
            f"no grid point reaches the domain k >= {tail.k_min:g} of tail '{tail.label}'"
        )
    return inside


# ---------------------------------------------------------------------------
# smile / asymptote
# ---------------------------------------------------------------------------


def run_smile(cfg: RunConfig) -> SmileCurve:
    """Price and invert the configured strikes."""
    strikes = cfg.strike_grid()
    logger.info("smile: %s model, %d strikes", cfg.model.family, strikes.size)
    return smile_curve(cfg.model, strikes, cfg.run.side)


def run_asymptote(cfg: RunConfig, side: Optional[Side] = None) -> AsymptoteTable:
    """The predicted wing on the configured grid, without pricing."""
    side = side or cfg.run.side
    tail = select_tail(cfg, side)
    grid = _tail_grid(cfg, tail)
    wing = build_wing(cfg, tail, grid)
    arguments = np.asarray(wing.argument_fn(grid), dtype=float)
    slopes = np.asarray(wing.slope_fn(grid), dtype=float)
    rows = [
        AsymptoteRow(k=float(k), psi_argument=float(a), asymptote_slope=float(s), clamped=bool(a < 0.0))
        for k, a, s in zip(grid, arguments, slopes)
    ]
    return AsymptoteTable(
        model=describe_model(cfg.model),
        side=side,
        variant=wing.variant,
        tail_source=cfg.run.tail_source,
        shift=wing.shift,
        theta_raw=wing.theta_raw,
        theta_limit=wing.theta_limit,
        rows=rows,
    )


WingReport = Union[AsymptoteTable, ComparisonReport]


def check_duality(right: WingReport, left: WingReport) -> float:
    """
    Largest row deviation between a right-wing and a left-wing report once
    each ψ argument is stripped of its wing's shift. Zero for a model whose
    law is symmetric about the origin.

    Rows are matched on the wing distance |k|; rows without a ψ argument
    (strikes below the tail's domain) are skipped.
    """
    left_by_k = {
        round(abs(row.k), 12): row for row in left.rows if row.psi_argument is not None
    }
    deviations = []
    for row in right.rows:
        mirror = left_by_k.get(round(abs(row.k), 12))
        if mirror is None or row.psi_argument is None:
            continue
        deviations.append(abs((row.psi_argument - right.shift) - (mirror.psi_argument - left.shift)))
    if not deviations:
        raise InvalidInputError("right and left tables share no wing distance")
    return max(deviations)


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def _price_route_slope(point: SmilePoint) -> Optional[float]:
    """ψ slope straight from a log-price, for strikes too deep to invert."""
    if point.log_price is None or point.k == 0.0:
        return None
    # p(-d) = e^{-d} c(d) for the Black-Scholes reference prices.
    log_call_equivalent = point.log_price - min(point.k, 0.0)
    return implied_slope_from_price(log_call_equivalent, point.k)


def _trend(ratios: List[float]) -> str:
    if not ratios:
        return "flat"
    top = np.abs(np.asarray(ratios[(len(ratios) - 1) // 2:], dtype=float) - 1.0)
    if np.all(top <= FLAT_TOL):
        return "flat"
    if np.all(np.diff(top) <= 0.0):
        return "converging"
    return "diverging"


def _regvar_index(tail: TailFunction, grid: np.ndarray, refusals: List[Dict[str, Any]]):
    if grid.size < MIN_GRID_POINTS:
        refusals.append({
            "stage": "regvar", "error": "InvalidInputError",
            "detail": f"grid has {grid.size} points, the index needs {MIN_GRID_POINTS}",
        })
        return None
    try:
        return estimate_index(lambda k: -tail(k), grid)
    except InvalidInputError as exc:
        refusals.append(_refusal("regvar", exc))
        return None


def _duality_gap(cfg: RunConfig, report: ComparisonReport, refusals: List[Dict[str, Any]]) -> Optional[float]:
    mirrored: Side = "left" if report.side == "right" else "right"
    try:
        other = run_asymptote(cfg, mirrored)
        if report.side == "right":
            return check_duality(report, other)
        return check_duality(other, report)
    except SmileAtlasError as exc:
        refusals.append(_refusal("duality", exc, side=mirrored))
        return None


def run_compare(cfg: RunConfig) -> ComparisonReport:
    """
    Numeric smile against the tail-wing asymptote, strike by strike, with
    θ, the regular-variation index of the tail and a convergence verdict.
    """
    m = cfg.model
    side = cfg.run.side
    tail = select_tail(cfg, side)
    grid = cfg.wing_grid()
    wing = build_wing(cfg, tail, _tail_grid(cfg, tail))
    logger.info(
        "compare: %s model, %s wing, variant %s from %s tail",
        m.family, side, wing.variant, cfg.run.tail_source,
    )

    curve = smile_curve(m, _sign(side) * grid, side)
    by_distance = {abs(p.k): p for p in curve.points}
    refusals: List[Dict[str, Any]] = []
    rows: List[ComparisonRow] = []
    ratios: List[float] = []
    for k in grid:
        point = by_distance[abs(_sign(side) * k)]
        slope, status = point.slope, point.status
        if status == "unreachable":
            slope = _price_route_slope(point)
            refusals.append({
                "stage": "inversion", "k": point.k, "error": "unreachable",
                "detail": f"log-price below {settings.REACH_LOG_PRICE:g}; compared at the log-price level",
            })
        elif status.startswith("failed"):
            refusals.append({"stage": "pricing", "k": point.k, "error": status.split(":", 1)[-1]})

        argument = asymptote = ratio = None
        if k >= tail.k_min:
            argument = float(wing.argument_fn(np.array([k]))[0])
            asymptote = float(wing.slope_fn(np.array([k]))[0])
            if argument < 0.0 and status == "ok":
                status = "clamped"
            if slope is not None and asymptote > 0.0 and math.isfinite(asymptote):
                ratio = slope / asymptote
                ratios.append(ratio)
        rows.append(ComparisonRow(
            k=point.k,
            log_price=point.log_price,
            total_vol=point.total_vol,
            slope=slope,
            asymptote_slope=asymptote,
            ratio=ratio,
            epsilon1=point.epsilon1,
            quad_err=point.quad_err,
            psi_argument=argument,
            status=status,
        ))
    rows.sort(key=lambda row: row.k)

    estimate = _regvar_index(tail, _tail_grid(cfg, tail), refusals)
    summary = ComparisonSummary(
        theta_estimate=wing.theta_limit,
        theta_raw=wing.theta_raw,
        regvar_index=estimate.alpha_hat if estimate else None,
        regvar_verdict=estimate.verdict if estimate else None,
        final_ratio=ratios[-1] if ratios else None,
        trend=_trend(ratios),
        lee_slope=lee_slope(critical_moments(m), side),
    )
    report = ComparisonReport(
        model=describe_model(m),
        side=side,
        variant=wing.variant,
        tail_source=cfg.run.tail_source,
        shift=wing.shift,
        rows=rows,
        summary=summary,
        refusals=refusals,
    )
    report.summary.duality_gap = _duality_gap(cfg, report, report.refusals)
    return report


# ---------------------------------------------------------------------------
# termstructure
# ---------------------------------------------------------------------------


def _with_maturity(m: ModelSpec, T: float) -> ModelSpec:
    return m.model_copy(update={"T": T})


def _non_decreasing(values: List[Optional[float]]) -> bool:
    present = [v for v in values if v is not None]
    return all(b >= a for a, b in zip(present, present[1:]))


def run_termstructure(cfg: RunConfig) -> TermStructureTable:
    """Total variance and ψ[-log c(k, T)/k] along the maturity grid at a fixed k."""
    k = cfg.termstructure.k
    if k == 0.0:
        raise ConfigError("the term-structure check needs k != 0 (ψ[-log c/k] is undefined at the money)")
    rows: List[TermStructureRow] = []
    for T in cfg.termstructure.T:
        priced = price_otm(_with_maturity(cfg.model, T), k).price
        total_variance = None
        if priced.log_otm >= settings.REACH_LOG_PRICE:
            total_variance = implied_total_vol(priced) ** 2
        log_call_equivalent = priced.log_otm - min(k, 0.0)
        rows.append(TermStructureRow(
            T=T,
            log_price=priced.log_otm,
            total_variance=total_variance,
            psi_price=implied_slope_from_price(log_call_equivalent, k),
        ))
    return TermStructureTable(
        model=describe_model(cfg.model),
        k=k,
        rows=rows,
        total_variance_monotone=_non_decreasing([r.total_variance for r in rows]),
        psi_monotone=_non_decreasing([r.psi_price for r in rows]),
    )


# ---------------------------------------------------------------------------
# regvar
# ---------------------------------------------------------------------------


def run_regvar(cfg: RunConfig) -> RegVarReport:
    """Regular-variation index of -log g on the wing grid, with Bingham ratios."""
    tail = select_tail(cfg)
    grid = _tail_grid(cfg, tail)

    def g(k: np.ndarray) -> np.ndarray:
        return -tail(k)

    estimate = estimate_index(g, grid)
    refusals: List[Dict[str, Any]] = []
    bingham: List[BinghamRow] = []
    if estimate.alpha_hat <= MIN_BINGHAM_INDEX:
        refusals.append({
            "stage": "bingham", "error": "slowly_varying",
            "detail": f"index {estimate.alpha_hat:.4g} <= {MIN_BINGHAM_INDEX}: Bingham's lemma needs a positive index",
        })
    else:
        for x in grid[-BINGHAM_POINTS:]:
            try:
                ratio = bingham_ratio(g, float(x))
            except SmileAtlasError as exc:
                refusals.append(_refusal("bingham", exc, x=float(x)))
                continue
            gx = float(g(np.array([x]))[0])
            bingham.append(BinghamRow(x=float(x), g=gx, transform=ratio * gx, ratio=ratio))
    return RegVarReport(
        model=describe_model(cfg.model),
        side=tail.side,
        tail_kind=tail.kind,
        tail_source=cfg.run.tail_source,
        estimate=estimate,
        bingham=bingham,
        refusals=refusals,
    )


# ---------------------------------------------------------------------------
# legendre
# ---------------------------------------------------------------------------


def _bound_holds(pairs: List[Tuple[float, Optional[float]]]) -> bool:
    return all(
        bound >= numeric - 1e-9 * max(1.0, abs(numeric))
        for bound, numeric in pairs
        if numeric is not None
    )


def run_legendre(cfg: RunConfig) -> LegendreTable:
    """Chernoff bounds on the grid next to the numerically computed log-tail."""
    side = cfg.run.side
    grid = cfg.wing_grid()
    rows = [legendre_bound(cfg.model, float(k), side) for k in grid]
    numeric: List[Optional[float]] = []
    refusals: List[Dict[str, Any]] = []
    for k in grid:
        try:
            numeric.append(tail_cdf(cfg.model, float(k), side))
        except SmileAtlasError as exc:
            numeric.append(None)
            refusals.append(_refusal("tail_cdf", exc, k=float(k)))
    return LegendreTable(
        model=describe_model(cfg.model),
        side=side,
        rows=rows,
        numeric_log_tail=numeric,
        bound_holds=_bound_holds([(r.log_tail_bound, n) for r, n in zip(rows, numeric)]),
        refusals=refusals,
    )
