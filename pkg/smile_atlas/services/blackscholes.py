"""
Normalized Black-Scholes pricing and implied total-volatility inversion.

Everything is in log scale: with d1,2 = -k/v ± v/2 the out-of-the-money call
is written as

    c = ½ e^{-d1²/2} [erfcx(-d1/√2) - erfcx(-d2/√2)]      (d1 < 0)

which stays accurate for prices far below the smallest double.
"""

import math
from typing import Optional, Tuple, Union

from scipy.optimize import brentq
from scipy.special import erf, erfcx, ndtr

from smile_atlas.models.prices import NormalizedPrice, OptionSide
from smile_atlas.utils.errors import BracketError, InvalidInputError, PriceBoundsError
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

VOL_FLOOR = 1e-8
_VOL_CEILING = 1e4


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidInputError(f"{name} must be finite, got {value}")


def d1(k: float, v: float) -> float:
    return -k / v + 0.5 * v


# erfcx(x) ~ (1/(x√π)) Σ_n c_n x^(-2n), accurate to double precision beyond x = 50.
_ERFCX_SERIES = (1.0, -0.5, 0.75, -1.875, 6.5625)
_ERFCX_SERIES_FROM = 50.0


def _erfcx_gap(x: float, h: float) -> float:
    """erfcx(x) - erfcx(x + h) for x > 50, h > 0, term by term without cancellation."""
    y = x + h
    total = 0.0
    for n, coef in enumerate(_ERFCX_SERIES):
        m = 2 * n + 1
        # x^-m - y^-m = h Σ_j x^-(j+1) y^-(m-j)
        total += coef * sum(x ** -(j + 1) * y ** -(m - j) for j in range(m))
    return h * total / math.sqrt(math.pi)


def _log_otm_call(k: float, v: float) -> float:
    """log c(k, v) for k >= 0."""
    d_1 = -k / v + 0.5 * v
    d_2 = d_1 - v
    if -d_1 / _SQRT2 > _ERFCX_SERIES_FROM:
        return -0.5 * d_1 * d_1 + math.log(0.5 * _erfcx_gap(-d_1 / _SQRT2, v / _SQRT2))
    if d_1 < 0.0:
        spread = float(erfcx(-d_1 / _SQRT2) - erfcx(-d_2 / _SQRT2))
        return -0.5 * d_1 * d_1 + math.log(0.5 * spread)
    # Φ(d1) - e^k Φ(d2) = [Φ(d1) - Φ(d2)] - (e^k - 1) Φ(d2)
    body = 0.5 * float(erf(d_1 / _SQRT2) - erf(d_2 / _SQRT2)) - math.expm1(k) * float(ndtr(d_2))
    return math.log(body)


def log_otm_price(k: float, v: float) -> float:
    """
    log of the out-of-the-money normalized price: the call for k >= 0, the
    put for k < 0 (put-call symmetry p(k, v) = e^k c(-k, v)).
    """
    return _log_otm_call(abs(k), v) + min(k, 0.0)


def bs_price(k: float, v: float, side: OptionSide = "call") -> NormalizedPrice:
    """Normalized Black-Scholes call or put with log-strike k and total vol v."""
    _check_finite(k=k, v=v)
    if v <= 0.0:
        raise InvalidInputError(f"total volatility must be positive, got {v}")
    return NormalizedPrice.from_otm(k, log_otm_price(k, v), side)


def bs_call(k: float, v: float) -> NormalizedPrice:
    """log[Φ(d1) - e^k Φ(d2)], wrapped with its out-of-the-money counterpart."""
    return bs_price(k, v, "call")


def implied_total_vol(
    price: Union[NormalizedPrice, float],
    k: Optional[float] = None,
    side: OptionSide = "call",
) -> float:
    """
    Invert a normalized price to the unique total implied volatility V(k).

    `price` is a NormalizedPrice or a raw log-price (of `side`) at log-strike
    `k`. The root is bracketed on [1e-8, sqrt(2|k|) + 10], widened if needed.
    """
    if not isinstance(price, NormalizedPrice):
        if k is None:
            raise InvalidInputError("a raw log-price needs its log-strike k")
        _check_finite(k=k, log_price=price)
        price = NormalizedPrice.from_log_price(k, float(price), side)
    elif k is not None and not math.isclose(k, price.k, rel_tol=0.0, abs_tol=1e-15):
        raise InvalidInputError(f"log-strike {k} does not match the price's k={price.k}")

    k = price.k
    target = price.log_otm
    ceiling = min(k, 0.0)
    if not target < ceiling:
        raise PriceBoundsError(
            f"out-of-the-money log-price {target:.6g} at k={k:.6g} is not below "
            f"its upper bound {ceiling:.6g}"
        )

    def objective(v: float) -> float:
        return log_otm_price(k, v) - target

    lo, hi = VOL_FLOOR, math.sqrt(2.0 * abs(k)) + 10.0
    if objective(lo) > 0.0:
        raise BracketError(
            f"log-price {target:.6g} at k={k:.6g} implies a total vol below {VOL_FLOOR:g}"
        )
    while objective(hi) < 0.0:
        if hi >= _VOL_CEILING:
            raise BracketError(
                f"could not bracket the implied vol of log-price {target:.6g} at k={k:.6g}"
            )
        logger.debug("widening implied-vol bracket beyond %.6g at k=%.6g", hi, k)
        hi *= 2.0
    return float(brentq(objective, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))


def normal_cdf_bounds(x: float, log: bool = False) -> Tuple[float, float]:
    """
    Mill's-ratio sandwich for Φ(-x), x > 0:

        e^{-x²/2}/(√(2π) x) (1 - 1/x²) <= Φ(-x) <= e^{-x²/2}/(√(2π) x)

    With log=True the logs are returned (lower is -inf for x <= 1).
    """
    _check_finite(x=x)
    if x <= 0.0:
        raise InvalidInputError(f"normal_cdf_bounds needs x > 0, got {x}")
    log_upper = -0.5 * x * x - _LOG_SQRT_2PI - math.log(x)
    factor = 1.0 - 1.0 / (x * x)
    if log:
        log_lower = log_upper + math.log(factor) if factor > 0.0 else -math.inf
        return log_lower, log_upper
    upper = math.exp(log_upper)
    return upper * factor, upper


def bs_call_bounds(k: float, v: float) -> Tuple[float, float]:
    """
    Log of the lower and upper bounds on c(k, v) obtained from the Mill's
    ratio sandwich; requires d1 < 0 (k > v²/2).
    """
    _check_finite(k=k, v=v)
    d_1 = d1(k, v)
    d_2 = d_1 - v
    if v <= 0.0 or d_1 >= 0.0:
        raise InvalidInputError("bs_call_bounds needs v > 0 and d1 < 0")
    lower = -1.0 / d_1 * (1.0 - 1.0 / d_1**2) + 1.0 / d_2
    upper = -1.0 / d_1 + 1.0 / d_2 * (1.0 - 1.0 / d_2**2)
    base = -0.5 * d_1 * d_1 - _LOG_SQRT_2PI
    log_lower = base + math.log(lower) if lower > 0.0 else -math.inf
    return log_lower, base + math.log(upper)


def epsilon1_residual(k: float, v: float, price: Union[NormalizedPrice, float]) -> float:
    """
    ε1(k) = log c(k) + d1(k, V)²/2, the residual of the leading Gaussian
    exponent. For k < 0 the put p(k) is used through the symmetry
    p(k) = e^k c(-k), so both wings share one definition.

    A float `price` is taken as the out-of-the-money log-price at k.
    """
    log_otm = price.log_otm if isinstance(price, NormalizedPrice) else float(price)
    _check_finite(k=k, v=v, log_price=log_otm)
    if v <= 0.0:
        raise InvalidInputError(f"total volatility must be positive, got {v}")
    d_1 = d1(abs(k), v)
    return log_otm - min(k, 0.0) + 0.5 * d_1 * d_1
