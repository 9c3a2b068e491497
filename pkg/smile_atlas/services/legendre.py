"""
Fenchel-Legendre (Chernoff) tail bounds.

For z >= 0 in the mgf strip, Markov's inequality gives

    log F̄(k) <= K(z) - z k,

optimized at the saddle point K'(z*) = k. The same bound on the left wing
uses z <= 0 and log F(-k) <= K(z) + z k.
"""

import math
from typing import Tuple

import numpy as np
from scipy.optimize import brentq

from smile_atlas.models.model_spec import BlackScholesSpec, FMLSSpec, ModelSpec
from smile_atlas.models.reports import LegendreSolution
from smile_atlas.models.tails import Side, TailFunction
from smile_atlas.services.model_zoo import (
    drift,
    fmls_scale,
    log_mgf,
    log_mgf_prime,
    mean,
    mgf_strip,
)
from smile_atlas.utils.errors import BracketError, DomainError, InvalidInputError
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)

_MAX_DOUBLINGS = 1100
# Keeps iterates strictly inside an open strip end.
_EDGE = 1e-14


def _inner_edge(edge: float, direction: float) -> float:
    return edge - direction * _EDGE * max(1.0, abs(edge))


def _closed_form_saddle(m: ModelSpec, x: float):
    if isinstance(m, BlackScholesSpec):
        return (x - drift(m)) / (m.sigma**2 * m.T), False
    if isinstance(m, FMLSSpec):
        theta = drift(m)
        scale = fmls_scale(m)
        if x <= theta or scale == 0.0:
            return 0.0, True
        return ((x - theta) / (m.alpha * scale)) ** (1.0 / (m.alpha - 1.0)), False
    return None


def saddle_point(m: ModelSpec, x: float) -> Tuple[float, bool]:
    """
    Solve K'(z) = x inside the mgf strip, on the side of 0 that x lies on
    relative to the mean. Returns (z*, boundary); boundary=True when K'
    never reaches x and z* is the minimizer of K(z) - z x at the strip edge.
    """
    if not math.isfinite(x):
        raise InvalidInputError(f"saddle point needs a finite target, got {x}")
    closed = _closed_form_saddle(m, x)
    if closed is not None:
        return closed

    centre = mean(m)
    if x == centre:
        return 0.0, False
    direction = 1.0 if x > centre else -1.0
    strip = mgf_strip(m)
    edge = strip.hi if direction > 0 else strip.lo

    def gap(z: float) -> float:
        return log_mgf_prime(m, z) - x

    if math.isfinite(edge):
        inner = _inner_edge(edge, direction)
        if direction * gap(inner) < 0.0:
            # K' stays short of x, so K(z) - z x keeps falling up to the edge.
            logger.debug("saddle for x=%.6g pinned at the strip edge %.6g", x, edge)
            return inner, True
        a, b = 0.0, inner
    else:
        a, b = 0.0, direction
        for _ in range(_MAX_DOUBLINGS):
            if direction * gap(b) >= 0.0:
                break
            logger.debug("widening saddle bracket beyond z=%.6g for x=%.6g", b, x)
            a, b = b, 2.0 * b
        else:
            raise BracketError(f"could not bracket the saddle point of K'(z) = {x:.6g}")
    lo, hi = sorted((a, b))
    return float(brentq(gap, lo, hi, xtol=1e-15, rtol=4.5e-16, maxiter=500)), False


def legendre_bound(m: ModelSpec, k: float, side: Side = "right") -> LegendreSolution:
    """
    Chernoff bound at wing distance k: log F̄(k) <= K(z*) - z* k on the
    right, log F(-k) <= K(z*) + z* k on the left.
    """
    if not math.isfinite(k):
        raise InvalidInputError(f"log-strike must be finite, got {k}")
    target = k if side == "right" else -k
    centre = mean(m)
    beyond_mean = target > centre if side == "right" else target < centre
    if not beyond_mean:
        # Only z = 0 is admissible on this side: the trivial bound F <= 1.
        return LegendreSolution(k=k, z_star=0.0, K_at_z=0.0, log_tail_bound=0.0, boundary=True)

    z_star, boundary = saddle_point(m, target)
    k_at_z = float(log_mgf(m, z_star))
    try:
        slope = log_mgf_prime(m, z_star)
        derivative_gap = abs(slope - target) if math.isfinite(slope) else math.inf
    except DomainError:
        derivative_gap = math.inf
    if not boundary and derivative_gap > 1e-9 * max(1.0, abs(target)):
        logger.warning(
            "saddle point at k=%.6g solved only to |K'(z*) - k| = %.3g", k, derivative_gap
        )
    return LegendreSolution(
        k=k,
        z_star=z_star,
        K_at_z=k_at_z,
        log_tail_bound=k_at_z - z_star * target,
        boundary=boundary,
        derivative_gap=derivative_gap if math.isfinite(derivative_gap) else 0.0,
    )


def legendre_tail(m: ModelSpec, side: Side = "right", k_min: float = 0.0) -> TailFunction:
    """cdf_tail TailFunction k -> K(z*(k)) - z*(k) k, ready for the wing formulas."""

    def evaluate(ks: np.ndarray) -> np.ndarray:
        flat = np.atleast_1d(ks)
        values = np.array([legendre_bound(m, float(k), side).log_tail_bound for k in flat])
        return values.reshape(np.shape(ks))

    return TailFunction(
        side=side, kind="cdf_tail", evaluator=evaluate, k_min=k_min, label=f"{m.family}:legendre"
    )
