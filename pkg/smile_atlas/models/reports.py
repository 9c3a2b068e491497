"""Pydantic models for smile curves, diagnostics and comparison reports."""

from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from smile_atlas.models.tails import Side, Variant

Verdict = Literal["regularly_varying", "inconclusive"]
Trend = Literal["converging", "flat", "diverging"]


class RegVarEstimate(BaseModel):
    """Numerical regular-variation index of g sampled on a geometric grid."""

    alpha_hat: float
    lam: float = Field(gt=1.0)
    # max |log g(λx) - log g(x) - α̂ log λ| over every finite step of the grid
    residual: float = Field(ge=0.0)
    # the same over the top half only; this one decides the verdict
    residual_top: float = Field(0.0, ge=0.0)
    verdict: Verdict
    alpha_extrapolated: Optional[float] = None
    n_points: int = 0


class LegendreSolution(BaseModel):
    """Chernoff bound log F̄(k) <= K(z*) - z* k at the saddle point z*."""

    k: float
    z_star: float
    K_at_z: float
    log_tail_bound: float
    boundary: bool = False
    derivative_gap: float = 0.0


class SmilePoint(BaseModel):
    """One strike of a smile curve; `status` explains any missing value."""

    k: float
    log_price: Optional[float] = None
    total_vol: Optional[float] = None
    slope: Optional[float] = None
    quad_err: float = 0.0
    epsilon1: Optional[float] = None
    status: str = "ok"


class SmileCurve(BaseModel):
    """Priced and inverted smile on one side; strikes ascending."""

    side: Side
    model: Dict[str, Any]
    points: List[SmilePoint]

    @property
    def strikes(self) -> np.ndarray:
        return np.array([p.k for p in self.points])

    @property
    def total_vols(self) -> np.ndarray:
        return np.array([np.nan if p.total_vol is None else p.total_vol for p in self.points])

    @property
    def slopes(self) -> np.ndarray:
        return np.array([np.nan if p.slope is None else p.slope for p in self.points])

    @property
    def log_prices(self) -> np.ndarray:
        return np.array([np.nan if p.log_price is None else p.log_price for p in self.points])

    @property
    def quadrature_error(self) -> np.ndarray:
        return np.array([p.quad_err for p in self.points])


class ComparisonRow(BaseModel):
    k: float
    log_price: Optional[float] = None
    total_vol: Optional[float] = None
    slope: Optional[float] = None
    asymptote_slope: Optional[float] = None
    ratio: Optional[float] = None
    epsilon1: Optional[float] = None
    quad_err: float = 0.0
    psi_argument: Optional[float] = None
    status: str = "ok"


class ComparisonSummary(BaseModel):
    theta_estimate: Optional[float] = None
    theta_raw: Optional[float] = None
    regvar_index: Optional[float] = None
    regvar_verdict: Optional[Verdict] = None
    final_ratio: Optional[float] = None
    trend: Trend = "flat"
    lee_slope: Optional[float] = None
    # check_duality against the mirrored wing; None when that wing is gated off
    duality_gap: Optional[float] = None


class ComparisonReport(BaseModel):
    """Numeric smile against a tail-wing asymptote, row by row."""

    model: Dict[str, Any]
    side: Side
    variant: Variant
    tail_source: str
    shift: float = 0.0
    rows: List[ComparisonRow]
    summary: ComparisonSummary
    refusals: List[Dict[str, Any]] = Field(default_factory=list)


class TermStructureRow(BaseModel):
    T: float
    log_price: float
    total_variance: Optional[float] = None
    psi_price: float


class TermStructureTable(BaseModel):
    model: Dict[str, Any]
    k: float
    rows: List[TermStructureRow]
    total_variance_monotone: bool
    psi_monotone: bool


class BinghamRow(BaseModel):
    x: float
    g: float
    transform: float
    ratio: float


class RegVarReport(BaseModel):
    model: Dict[str, Any]
    side: Side
    tail_kind: str
    tail_source: str
    estimate: RegVarEstimate
    bingham: List[BinghamRow] = Field(default_factory=list)
    refusals: List[Dict[str, Any]] = Field(default_factory=list)


class AsymptoteRow(BaseModel):
    k: float
    psi_argument: float
    asymptote_slope: float
    clamped: bool = False


class AsymptoteTable(BaseModel):
    model: Dict[str, Any]
    side: Side
    variant: Variant
    tail_source: str
    shift: float = 0.0
    theta_raw: Optional[float] = None
    theta_limit: Optional[float] = None
    rows: List[AsymptoteRow]


class LegendreTable(BaseModel):
    model: Dict[str, Any]
    side: Side = "right"
    rows: List[LegendreSolution]
    numeric_log_tail: List[Optional[float]] = Field(default_factory=list)
    bound_holds: bool = True
    refusals: List[Dict[str, Any]] = Field(default_factory=list)
