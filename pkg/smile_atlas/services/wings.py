"""
The ψ transform and the tail-wing formulas for both wings.

Right wing, (IR) assumed:  V(k)²/k ~ ψ[-log c(k)/k]
                                   ~ ψ[-1 - log F̄(k)/k]
                                   ~ ψ[-1 - log f(k)/k]
Left wing, (IL) assumed:   V(-k)²/k ~ ψ[-1 - log p(-k)/k]
                                    ~ ψ[-log F(-k)/k]
                                    ~ ψ[-log f(-k)/k]

The ±1 placement differs between the wings; it is written down once in
`PSI_SHIFT` and nowhere else.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from smile_atlas.models.tails import (
    VARIANT_FOR_KIND,
    MomentCondition,
    Side,
    TailFunction,
    WingAsymptote,
)
from smile_atlas.utils.errors import ConditionGateError, InvalidInputError
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)

# ψ argument = PSI_SHIFT[(side, kind)] - log g(k)/k
PSI_SHIFT = {
    ("right", "price"): 0.0,
    ("right", "cdf_tail"): -1.0,
    ("right", "density"): -1.0,
    ("left", "price"): -1.0,
    ("left", "cdf_tail"): 0.0,
    ("left", "density"): 0.0,
}

# Predicted slopes live in [0, 2): a clamped argument maps just below 2.
SLOPE_CAP = float(np.nextafter(2.0, 0.0))


def psi(x):
    """
    ψ(x) = 2 - 4(√(x² + x) - x), evaluated as 2x/(x + √(x² + x))².

    Defined on [0, +inf], strictly decreasing from 2 to 0. Scalars in,
    scalars out; arrays in, arrays out.
    """
    xs = np.asarray(x, dtype=float)
    if np.isnan(xs).any() or (xs < 0.0).any():
        raise InvalidInputError("ψ is defined on [0, +inf]")
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.sqrt(xs * xs + xs)
        out = 2.0 * xs / (xs + root) ** 2
        # 2x/(x + √(x²+x))² ~ 1/(2x) overflows inside the square for huge x.
        out = np.where(xs > 1e150, 0.5 / xs, out)
    out = np.where(xs == 0.0, 2.0, out)
    out = np.where(np.isinf(xs), 0.0, out)
    return float(out) if out.ndim == 0 else out


def psi_inverse(u):
    """
    Inverse of ψ on (0, 2]: 1/(2u) + u/8 - 1/2, the admissible root of the
    quadratic linking -log c/k to V²/k.
    """
    us = np.asarray(u, dtype=float)
    if np.isnan(us).any() or (us <= 0.0).any() or (us > 2.0).any():
        raise InvalidInputError("psi_inverse is defined on (0, 2]")
    out = 0.5 / us + us / 8.0 - 0.5
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def implied_slope_from_price(log_c: float, k: float, epsilon1: float = 0.0) -> float:
    """
    V²/|k| = ψ(-log c/|k| + ε1/|k|): the exact quadratic solve behind the
    wing formula. With ε1 = 0 it is the price-route asymptote.
    """
    if k == 0.0 or not math.isfinite(log_c):
        raise InvalidInputError("implied_slope_from_price needs k != 0 and a finite log-price")
    arg = (-log_c + epsilon1) / abs(k)
    return psi(max(arg, 0.0))


def check_condition(cond: MomentCondition, side: Side) -> Tuple[bool, float]:
    """(IR) on the right: p_plus > 1, margin p_plus - 1. (IL) on the left: q_minus > 0."""
    if side == "right":
        return cond.ir_holds, cond.p_plus - 1.0
    return cond.il_holds, cond.q_minus


def _require(cond: MomentCondition, side: Side) -> None:
    holds, margin = check_condition(cond, side)
    if holds:
        return
    if side == "right":
        reason = (
            f"(IR) fails: E[exp((1+eps)X)] is infinite for every eps > 0 "
            f"(p_plus = {cond.p_plus:g}); the right-wing formula is not licensed"
        )
    else:
        reason = (
            f"(IL) fails: E[exp(-eps X)] is infinite for every eps > 0 "
            f"(q_minus = {cond.q_minus:g}); the left-wing formula is not licensed"
        )
    logger.info("condition gate refused %s wing: %s", side, reason)
    raise ConditionGateError(side, margin, reason)


def psi_argument(tail: TailFunction, k) -> np.ndarray:
    """Raw (unclamped) ψ argument shift - log g(k)/k of a tail."""
    ks = np.asarray(k, dtype=float)
    if (ks <= 0.0).any():
        raise InvalidInputError("ψ arguments are taken at positive wing distances k")
    return PSI_SHIFT[(tail.side, tail.kind)] - tail(ks) / ks


def estimate_theta(tail: TailFunction, grid: Sequence[float]) -> Tuple[float, float]:
    """
    Limit of the ψ argument: the raw value at the largest grid point and a
    two-point extrapolation assuming arg(k) = θ + C/k.
    """
    ks = np.sort(np.asarray(grid, dtype=float))
    if ks.size < 2:
        raise InvalidInputError("estimating θ needs at least two grid points")
    k1, k2 = ks[-2], ks[-1]
    a1, a2 = psi_argument(tail, [k1, k2])
    raw = float(a2)
    extrapolated = float((k2 * a2 - k1 * a1) / (k2 - k1))
    return raw, extrapolated


def _clamped_argument(tail: TailFunction):
    shift = PSI_SHIFT[(tail.side, tail.kind)]

    def argument(k: np.ndarray) -> np.ndarray:
        return shift - tail(k) / k

    def clamped(k: np.ndarray) -> np.ndarray:
        raw = argument(k)
        negative = raw < 0.0
        if np.any(negative):
            logger.warning(
                "ψ argument of '%s' negative at %d strike(s) (pre-asymptotic), clamped at 0",
                tail.label, int(np.count_nonzero(negative)),
            )
        return np.maximum(raw, 0.0)

    return shift, argument, clamped


def _build(tail: TailFunction, variant: str, grid: Optional[Sequence[float]], sublinear: bool) -> WingAsymptote:
    shift, argument, clamped = _clamped_argument(tail)

    if sublinear:
        def slope_fn(k):
            ks = np.asarray(k, dtype=float)
            arg = clamped(ks)
            with np.errstate(divide="ignore"):
                return np.minimum(0.5 / arg, SLOPE_CAP)
    else:
        def slope_fn(k):
            return np.minimum(psi(clamped(np.asarray(k, dtype=float))), SLOPE_CAP)

    theta_raw = theta_limit = None
    if grid is not None and len(grid) >= 2:
        theta_raw, theta_limit = estimate_theta(tail, grid)
    return WingAsymptote(
        side=tail.side,
        variant=variant,
        kind=tail.kind,
        shift=shift,
        argument_fn=argument,
        slope_fn=slope_fn,
        theta_raw=theta_raw,
        theta_limit=theta_limit,
        label=tail.label,
    )


def right_wing(
    tail: TailFunction, cond: MomentCondition, grid: Optional[Sequence[float]] = None
) -> WingAsymptote:
    """Variants (iv), (iv'), (iv'') of the right-tail-wing formula, by tail kind."""
    if tail.side != "right":
        raise InvalidInputError("right_wing needs a right-side tail")
    _require(cond, "right")
    return _build(tail, VARIANT_FOR_KIND[tail.kind], grid, sublinear=False)


def left_wing(
    tail: TailFunction, cond: MomentCondition, grid: Optional[Sequence[float]] = None
) -> WingAsymptote:
    """
    Variants (iv), (iv'), (iv'') of the left-tail-wing formula, by tail kind.

    The density variant is stated for V(-k)²/k: the left wing lives at -k.
    """
    if tail.side != "left":
        raise InvalidInputError("left_wing needs a left-side tail")
    _require(cond, "left")
    return _build(tail, VARIANT_FOR_KIND[tail.kind], grid, sublinear=False)


def sublinear_wing(
    tail: TailFunction,
    cond: Optional[MomentCondition] = None,
    grid: Optional[Sequence[float]] = None,
) -> WingAsymptote:
    """
    Variant (v): when the ψ argument diverges, V²/|k| ~ 1/(2 · argument).

    The caller asserts divergence (e.g. a regular-variation index above 1).
    """
    if cond is not None:
        _require(cond, tail.side)
    return _build(tail, "v", grid, sublinear=True)


def lee_slope(cond: MomentCondition, side: Side) -> float:
    """Lee's moment formula: limsup V²/|k| = ψ(p_plus - 1) right, ψ(q_minus) left."""
    if side == "right":
        return psi(max(cond.p_plus - 1.0, 0.0))
    return psi(cond.q_minus)
