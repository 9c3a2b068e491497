"""
Option prices, tail probabilities and smile curves for every model.

Routes, by family:
  - Black-Scholes: closed form.
  - Merton: Poisson mixture of Black-Scholes components (exact series).
  - Synthetic tails: log-domain quadrature of the density and of the
    tail-integral price representation c(k) = ∫_k^∞ e^x F̄(x) dx.
  - NIG, FMLS: saddle-shifted contour integrals of the log-mgf, with the
    real-line Gil-Pelaez integral where the strip has no room (FMLS left).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence, Tuple

import numpy as np
from scipy.special import log_ndtr

from smile_atlas.config import settings
from smile_atlas.models.model_spec import (
    BlackScholesSpec,
    MertonSpec,
    ModelSpec,
    SyntheticTailSpec,
    describe_model,
)
from smile_atlas.models.prices import NormalizedPrice, PricedStrike
from smile_atlas.models.reports import SmileCurve, SmilePoint
from smile_atlas.models.tails import Side, TailFunction, TailKind
from smile_atlas.services import fourier
from smile_atlas.services.blackscholes import epsilon1_residual, implied_total_vol, log_otm_price
from smile_atlas.services.legendre import saddle_point
from smile_atlas.services.model_zoo import (
    complex_log_mgf,
    critical_moments,
    drift,
    exact_log_density,
    has_exact_density,
    mgf_strip,
    poisson_mixture,
)
from smile_atlas.services.quadrature import decay_length, log_integrate
from smile_atlas.services.wings import check_condition
from smile_atlas.utils.errors import (
    ConditionGateError,
    InvalidInputError,
    NumericalError,
    QuadratureError,
    SmileAtlasError,
    UnsupportedError,
)
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)

# Closest approach of a contour abscissa to a pole or a strip edge.
_POLE_GAP = 0.5


def _gate(m: ModelSpec, side: Side) -> None:
    holds, margin = check_condition(critical_moments(m), side)
    if not holds:
        name = "(IR)" if side == "right" else "(IL)"
        raise ConditionGateError(side, margin, f"{name} fails for the {m.family} model")


def _check_finite(k: float) -> None:
    if not math.isfinite(k):
        raise InvalidInputError(f"log-strike must be finite, got {k}")


# ---------------------------------------------------------------------------
# Contour abscissae
# ---------------------------------------------------------------------------


def _abscissa(
    m: ModelSpec, x: float, lo: float, hi: float, poles: Tuple[float, ...] = (0.0,)
) -> Tuple[float, float]:
    """
    Saddle point of K(z) - z x clipped into [lo, hi], plus the distance
    from the result to the nearest pole or strip edge.
    """
    z_star, _ = saddle_point(m, x)
    c = min(max(z_star, lo), hi)
    strip = mgf_strip(m)
    near = min(min(abs(c - p) for p in poles), c - strip.lo, strip.hi - c)
    return c, max(near, 1e-12)


def _edge_clearance(edge: float, x: float) -> float:
    """How far to stay inside a finite strip edge at target x."""
    return min(_POLE_GAP, 0.5 / max(1.0, abs(x)), 0.25 * abs(edge))


def _right_tail_contour(m: ModelSpec, x: float) -> Tuple[float, float]:
    strip = mgf_strip(m)
    top = strip.hi - _edge_clearance(strip.hi, x) if math.isfinite(strip.hi) else math.inf
    floor = min(_POLE_GAP, 0.5 * top)
    c, near = _abscissa(m, x, floor, top)
    res = fourier.log_tail_contour(complex_log_mgf(m), x, c, near)
    return res.log_value, res.rel_error


def _left_tail_transform(m: ModelSpec, x: float) -> Tuple[float, float]:
    """log P(X < x) for transform-priced models."""
    strip = mgf_strip(m)
    if strip.lo < 0.0:
        bottom = strip.lo + _edge_clearance(strip.lo, x) if math.isfinite(strip.lo) else -math.inf
        ceiling = -min(_POLE_GAP, -0.5 * bottom)
        c, near = _abscissa(m, x, bottom, ceiling)
        res = fourier.log_tail_contour(complex_log_mgf(m), x, c, near)
        return res.log_value, res.rel_error
    prob, abserr = fourier.gil_pelaez_cdf(complex_log_mgf(m), x)
    if not prob > 0.0:
        raise QuadratureError(f"Gil-Pelaez cdf at x={x:.6g} lost all digits ({prob:.3g})")
    return math.log(prob), abserr / prob


# ---------------------------------------------------------------------------
# Tail probabilities
# ---------------------------------------------------------------------------


def _normal_tail(mean_n: np.ndarray, var_n: np.ndarray, x: np.ndarray) -> np.ndarray:
    """log P(N(mean, var) > x); a zero variance is a point mass."""
    safe = np.sqrt(np.where(var_n > 0.0, var_n, 1.0))
    smooth = log_ndtr((mean_n - x) / safe)
    atom = np.where(mean_n > x, 0.0, -math.inf)
    return np.where(var_n > 0.0, smooth, atom)


def _normal_head(mean_n: np.ndarray, var_n: np.ndarray, x: np.ndarray) -> np.ndarray:
    """log P(N(mean, var) < x)."""
    safe = np.sqrt(np.where(var_n > 0.0, var_n, 1.0))
    smooth = log_ndtr((x - mean_n) / safe)
    atom = np.where(mean_n < x, 0.0, -math.inf)
    return np.where(var_n > 0.0, smooth, atom)


def _density_tail(m: ModelSpec, x: float, side: Side) -> Tuple[float, float]:
    def log_f(t: np.ndarray) -> np.ndarray:
        return exact_log_density(m, t)

    if side == "right":
        res = log_integrate(log_f, x, scale=decay_length(log_f, x, ceiling=1.0))
    else:
        scale = decay_length(lambda t: log_f(-t), -x, ceiling=1.0)
        res = log_integrate(log_f, -math.inf, x, scale=scale)
    return res.log_value, res.rel_error


def _log_tail(m: ModelSpec, k: float, side: Side) -> Tuple[float, float]:
    """(log tail, relative error): log F̄(k) on the right, log F(-k) on the left."""
    _check_finite(k)
    x = k if side == "right" else -k
    if isinstance(m, BlackScholesSpec):
        scale = m.sigma * math.sqrt(m.T)
        z = (drift(m) - x) / scale if side == "right" else (x - drift(m)) / scale
        return float(log_ndtr(z)), 0.0
    if isinstance(m, MertonSpec):
        component = _normal_tail if side == "right" else _normal_head
        return float(poisson_mixture(m, component, x, log_bound=0.0)[0]), 0.0
    if isinstance(m, SyntheticTailSpec):
        return _density_tail(m, x, side)
    if side == "right":
        return _right_tail_contour(m, x)
    return _left_tail_transform(m, x)


def tail_cdf(m: ModelSpec, k: float, side: Side = "right") -> float:
    """
    log F̄(k) on the right wing, log F(-k) on the left wing.

    Closed form for Black-Scholes, Poisson series for Merton, density
    quadrature for synthetic tails and contour inversion for NIG and FMLS.
    """
    return _log_tail(m, k, side)[0]


# ---------------------------------------------------------------------------
# Prices from tails and densities
# ---------------------------------------------------------------------------


def _vectorized_tail(m: ModelSpec, side: Side):
    def evaluate(xs: np.ndarray) -> np.ndarray:
        flat = np.atleast_1d(xs)
        return np.array([_log_tail(m, float(x), side)[0] for x in flat]).reshape(np.shape(xs))

    return evaluate


def _call_from_tail(m: ModelSpec, k: float) -> Tuple[float, float]:
    tail = _vectorized_tail(m, "right")

    def log_integrand(x: np.ndarray) -> np.ndarray:
        return x + tail(x)

    res = log_integrate(log_integrand, k, scale=decay_length(log_integrand, k, ceiling=1.0))
    return res.log_value, res.rel_error


def _put_from_tail(m: ModelSpec, k: float) -> Tuple[float, float]:
    tail = _vectorized_tail(m, "left")

    def log_integrand(x: np.ndarray) -> np.ndarray:
        return -x + tail(x)

    res = log_integrate(log_integrand, k, scale=decay_length(log_integrand, k, ceiling=1.0))
    return res.log_value, res.rel_error


def call_from_tail(m: ModelSpec, k: float) -> NormalizedPrice:
    """c(k) = ∫_k^∞ e^x F̄(x) dx by log-domain quadrature; needs (IR)."""
    _check_finite(k)
    _gate(m, "right")
    log_c, _ = _call_from_tail(m, k)
    return NormalizedPrice.from_log_price(k, log_c, "call")


def put_from_tail(m: ModelSpec, k: float) -> NormalizedPrice:
    """p(-k) = ∫_k^∞ e^{-x} F(-x) dx at wing distance k >= 0; needs (IL)."""
    _check_finite(k)
    if k < 0.0:
        raise InvalidInputError(f"put_from_tail takes the wing distance k >= 0, got {k}")
    _gate(m, "left")
    log_p, _ = _put_from_tail(m, k)
    return NormalizedPrice.from_log_price(-k, log_p, "put")


def call_from_density(m: ModelSpec, k: float) -> NormalizedPrice:
    """c(k) = ∫_k^∞ (e^x - e^k) f(x) dx, straight from the definition."""
    _check_finite(k)
    if not has_exact_density(m):
        raise UnsupportedError(f"the {m.family} model has no exact density")

    def log_integrand(x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return k + np.log(np.expm1(x - k)) + exact_log_density(m, x)

    scale = decay_length(lambda x: exact_log_density(m, x), k, ceiling=1.0)
    res = log_integrate(log_integrand, k, scale=scale)
    return NormalizedPrice.from_log_price(k, res.log_value, "call")


# ---------------------------------------------------------------------------
# Prices from transforms
# ---------------------------------------------------------------------------


def _call_transform(m: ModelSpec, k: float) -> Tuple[float, float]:
    strip = mgf_strip(m)
    if not strip.hi > 1.0:
        raise ConditionGateError("right", strip.hi - 1.0, f"E[e^X] is infinite in the {m.family} model")
    top = strip.hi - _edge_clearance(strip.hi - 1.0, k) if math.isfinite(strip.hi) else math.inf
    floor = 1.0 + min(_POLE_GAP, 0.5 * (top - 1.0))
    c, near = _abscissa(m, k, floor, top, poles=(0.0, 1.0))
    res = fourier.log_price_contour(complex_log_mgf(m), k, c, near)
    return res.log_value, res.rel_error


def _put_transform(m: ModelSpec, k: float) -> Tuple[float, float]:
    strip = mgf_strip(m)
    log_mgf_c = complex_log_mgf(m)
    if strip.lo < 0.0:
        bottom = strip.lo + _edge_clearance(strip.lo, k) if math.isfinite(strip.lo) else -math.inf
        ceiling = -min(_POLE_GAP, -0.5 * bottom)
        c, near = _abscissa(m, k, bottom, ceiling, poles=(0.0, 1.0))
        res = fourier.log_price_contour(log_mgf_c, k, c, near)
        return res.log_value, res.rel_error
    # No room left of the origin: the contour at c = 1/2 gives call - 1 = put - e^k.
    log_scale, value, abserr = fourier.lewis_integral(log_mgf_c, k, 0.5, 0.5)
    put = math.exp(k) + math.exp(log_scale) * value
    if not put > 0.0:
        raise QuadratureError(f"put at k={k:.6g} lost all digits through parity ({put:.3g})")
    return math.log(put), math.exp(log_scale) * abserr / put


def call_from_transform(m: ModelSpec, k: float) -> NormalizedPrice:
    """Call by the Lewis contour at the saddle point, for NIG and FMLS."""
    _check_finite(k)
    log_c, _ = _call_transform(m, k)
    return NormalizedPrice.from_log_price(k, log_c, "call")


def put_from_transform(m: ModelSpec, k: float) -> NormalizedPrice:
    """Put at log-strike k by the Lewis contour left of the origin (or by parity)."""
    _check_finite(k)
    log_p, _ = _put_transform(m, k)
    return NormalizedPrice.from_log_price(k, log_p, "put")


# ---------------------------------------------------------------------------
# Out-of-the-money prices and smiles
# ---------------------------------------------------------------------------


def _gaussian_component_price(log_forward: float, var: float, k: float, side: str) -> float:
    """log E(e^Y - e^k)^+ (call) or log E(e^k - e^Y)^+ (put), Y Gaussian."""
    if var > 0.0:
        v = math.sqrt(var)
        shifted = k - log_forward
        price = NormalizedPrice.from_otm(shifted, log_otm_price(shifted, v), side)
        return log_forward + price.log_price
    # Degenerate component: e^Y = e^{log_forward} exactly.
    if side == "call":
        return log_forward + math.log(-math.expm1(k - log_forward)) if log_forward > k else -math.inf
    return k + math.log(-math.expm1(log_forward - k)) if k > log_forward else -math.inf


def _merton_price(m: MertonSpec, k: float, side: str) -> float:
    component = np.vectorize(
        lambda mean_n, var_n, x: _gaussian_component_price(mean_n + 0.5 * var_n, var_n, x, side),
        otypes=[float],
    )
    # A put is worth at most e^k.
    bound = k if side == "put" else None
    return float(poisson_mixture(m, component, k, log_bound=bound)[0])


def price_otm(m: ModelSpec, k: float) -> PricedStrike:
    """
    Out-of-the-money price at log-strike k: the call for k >= 0, the put
    for k < 0, by the route suited to the model family.
    """
    _check_finite(k)
    side = "call" if k >= 0.0 else "put"
    if isinstance(m, BlackScholesSpec):
        variance = m.sigma**2 * m.T
        log_value = _gaussian_component_price(drift(m) + 0.5 * variance, variance, k, side)
        return PricedStrike(price=NormalizedPrice.from_log_price(k, log_value, side), route="closed_form")
    if isinstance(m, MertonSpec):
        log_value = _merton_price(m, k, side)
        return PricedStrike(price=NormalizedPrice.from_log_price(k, log_value, side), route="poisson_series")
    if isinstance(m, SyntheticTailSpec):
        log_value, err = _call_from_tail(m, k) if side == "call" else _put_from_tail(m, -k)
        return PricedStrike(
            price=NormalizedPrice.from_log_price(k, log_value, side), quad_err=err, route="tail_integral"
        )
    log_value, err = _call_transform(m, k) if side == "call" else _put_transform(m, k)
    return PricedStrike(
        price=NormalizedPrice.from_log_price(k, log_value, side), quad_err=err, route="contour"
    )


def _smile_point(m: ModelSpec, k: float) -> SmilePoint:
    try:
        priced = price_otm(m, k)
    except SmileAtlasError as exc:
        logger.warning("pricing failed at k=%.6g: %s", k, exc)
        return SmilePoint(k=k, status=f"failed:{type(exc).__name__}")
    log_otm = priced.price.log_otm
    if log_otm < settings.REACH_LOG_PRICE:
        logger.info(
            "k=%.6g unreachable: log-price %.6g below %.6g, no vol inversion",
            k, log_otm, settings.REACH_LOG_PRICE,
        )
        return SmilePoint(k=k, log_price=log_otm, quad_err=priced.quad_err, status="unreachable")
    try:
        v = implied_total_vol(priced.price)
    except NumericalError as exc:
        logger.warning("implied vol failed at k=%.6g: %s", k, exc)
        return SmilePoint(
            k=k, log_price=log_otm, quad_err=priced.quad_err, status=f"failed:{type(exc).__name__}"
        )
    return SmilePoint(
        k=k,
        log_price=log_otm,
        total_vol=v,
        slope=v * v / abs(k) if k != 0.0 else None,
        quad_err=priced.quad_err,
        epsilon1=epsilon1_residual(k, v, priced.price),
    )


def smile_curve(m: ModelSpec, grid: Sequence[float], side: Side = "right") -> SmileCurve:
    """
    Price and invert every log-strike of `grid` (sorted ascending). Strikes
    are independent and priced on a thread pool; failures stay per-strike.
    """
    strikes = sorted(float(k) for k in grid)
    for k in strikes:
        _check_finite(k)
    with ThreadPoolExecutor(max_workers=max(1, settings.WORKERS)) as pool:
        points = list(pool.map(lambda k: _smile_point(m, k), strikes))
    return SmileCurve(side=side, model=describe_model(m), points=points)


# ---------------------------------------------------------------------------
# Numeric tails for the wing formulas
# ---------------------------------------------------------------------------


def tail_function(m: ModelSpec, side: Side, kind: TailKind) -> TailFunction:
    """
    Numerically computed log-tail in the wing distance k: the exact density,
    the tail probability or the out-of-the-money price.
    """
    sign = 1.0 if side == "right" else -1.0
    if kind == "density":
        if not has_exact_density(m):
            raise UnsupportedError(
                f"the {m.family} model has no exact density; use its closed-form asymptote"
            )

        def evaluate(ks: np.ndarray) -> np.ndarray:
            return exact_log_density(m, sign * np.asarray(ks, dtype=float))

    elif kind == "cdf_tail":
        evaluate = _vectorized_tail(m, side)
    else:

        def evaluate(ks: np.ndarray) -> np.ndarray:
            flat = np.atleast_1d(ks)
            logs = [price_otm(m, sign * float(k)).price.log_otm for k in flat]
            return np.array(logs).reshape(np.shape(ks))

    return TailFunction(side=side, kind=kind, evaluator=evaluate, label=f"{m.family}:numeric {kind}")


__all__ = [
    "call_from_density",
    "call_from_tail",
    "call_from_transform",
    "price_otm",
    "put_from_tail",
    "put_from_transform",
    "smile_curve",
    "tail_cdf",
    "tail_function",
]
