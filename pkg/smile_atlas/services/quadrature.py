"""
Adaptive Gauss-Kronrod quadrature carried out entirely in log scale.

The integrands of this package (densities, tails, option prices deep in the
wings) routinely live around e^-300 and below, so panel sums are formed with
log-sum-exp and never leave log space.

Strategy:
  1. Half-infinite ranges are covered by panels of doubling width until a
     panel's largest sample falls `truncation_nats` below the running maximum.
  2. Each panel carries a G7/K15 estimate and a relative error estimate.
  3. The panel with the largest weighted error is bisected until the total
     relative error is below `rel_tol` or the panel budget is exhausted.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy.special import logsumexp

from smile_atlas.config import settings
from smile_atlas.utils.errors import QuadratureError
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)

LogIntegrand = Callable[[np.ndarray], np.ndarray]

# Nodes and weights for Gauss-Kronrod (G7 embedded in K15).
_GAUSS_KRONROD = (
    # node               weight Gauss       weight Kronrod
    (+0.949107912342759, 0.129484966168870, 0.063092092629979),
    (-0.949107912342759, 0.129484966168870, 0.063092092629979),
    (+0.741531185599394, 0.279705391489277, 0.140653259715525),
    (-0.741531185599394, 0.279705391489277, 0.140653259715525),
    (+0.405845151377397, 0.381830050505119, 0.190350578064785),
    (-0.405845151377397, 0.381830050505119, 0.190350578064785),
    (0.000000000000000, 0.417959183673469, 0.209482141084728),
    (+0.991455371120813, 0.000000000000000, 0.022935322010529),
    (-0.991455371120813, 0.000000000000000, 0.022935322010529),
    (+0.864864423359769, 0.000000000000000, 0.104790010322250),
    (-0.864864423359769, 0.000000000000000, 0.104790010322250),
    (+0.586087235467691, 0.000000000000000, 0.169004726639267),
    (-0.586087235467691, 0.000000000000000, 0.169004726639267),
    (+0.207784955007898, 0.000000000000000, 0.204432940075298),
    (-0.207784955007898, 0.000000000000000, 0.204432940075298),
)
_NODES = np.array([row[0] for row in _GAUSS_KRONROD])
_LOG_WK = np.log(np.array([row[2] for row in _GAUSS_KRONROD]))
_GAUSS_IDX = np.arange(7)
_LOG_WG = np.log(np.array([row[1] for row in _GAUSS_KRONROD[:7]]))

_MAX_EXPANSIONS = 200
# Worse than this and the value is not worth reporting.
_HARD_REL_TOL = 1e-6


@dataclass
class _Panel:
    lo: float
    hi: float
    log_value: float
    rel_err: float
    peak: float


@dataclass
class LogQuadResult:
    """log of the integral plus its estimated relative (= log-scale) error."""

    log_value: float
    rel_error: float
    n_panels: int
    upper: float


def _panel(log_f: LogIntegrand, lo: float, hi: float) -> _Panel:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    values = np.asarray(log_f(mid + half * _NODES), dtype=float)
    if np.isnan(values).any():
        raise QuadratureError(f"integrand returned NaN on [{lo:.6g}, {hi:.6g}]")
    if not np.isfinite(values).any():
        return _Panel(lo, hi, -math.inf, 0.0, -math.inf)

    log_half = math.log(half)
    log_k = float(logsumexp(values + _LOG_WK)) + log_half
    gauss = values[_GAUSS_IDX]
    if np.isfinite(gauss).any():
        log_g = float(logsumexp(gauss + _LOG_WG)) + log_half
        # QUADPACK-style scaling of the G7/K15 discrepancy.
        rel_err = min(1.0, (200.0 * abs(math.expm1(log_g - log_k))) ** 1.5)
    else:
        rel_err = 1.0
    return _Panel(lo, hi, log_k, rel_err, float(values.max()))


def _expand(
    log_f: LogIntegrand, a: float, scale: float, nats: float
) -> List[_Panel]:
    panels: List[_Panel] = []
    lo, width, running_max = a, scale, -math.inf
    for _ in range(_MAX_EXPANSIONS):
        panel = _panel(log_f, lo, lo + width)
        panels.append(panel)
        running_max = max(running_max, panel.peak)
        if running_max > -math.inf and panel.peak < running_max - nats:
            return panels
        lo += width
        width *= 2.0
    raise QuadratureError(
        f"integrand does not decay on [{a:.6g}, inf): still within {nats:g} nats "
        f"of its maximum at x={lo:.6g}"
    )


def decay_length(log_f: LogIntegrand, a: float, ceiling: Optional[float] = None) -> float:
    """
    1/|d log_f/dx| at `a` by a forward difference: a first-panel width for
    `log_integrate`. Falls back to `ceiling` (default max(1, |a|)) when the
    integrand is not decreasing at `a`.
    """
    ceiling = max(1.0, abs(a)) if ceiling is None else ceiling
    h = 1e-6 * max(1.0, abs(a))
    f0, f1 = np.asarray(log_f(np.array([a, a + h])), dtype=float)
    slope = (f0 - f1) / h
    if not math.isfinite(slope) or slope <= 0.0:
        return ceiling
    return min(max(1.0 / slope, 1e-8), ceiling)


def log_integrate(
    log_f: LogIntegrand,
    a: float,
    b: float = math.inf,
    *,
    scale: float = 1.0,
    rel_tol: Optional[float] = None,
    max_panels: int = 600,
    truncation_nats: Optional[float] = None,
) -> LogQuadResult:
    """
    Return log ∫_a^b exp(log_f(x)) dx for a vectorised log-integrand.

    `a` may be -inf (the range is mirrored), `b` may be +inf. `scale` is the
    width of the first panel and should be of the order of the integrand's
    decay length.
    """
    rel_tol = settings.QUAD_REL_TOL if rel_tol is None else rel_tol
    nats = settings.TRUNCATION_NATS if truncation_nats is None else truncation_nats

    if a == -math.inf:
        if b == math.inf:
            left = log_integrate(log_f, -math.inf, 0.0, scale=scale, rel_tol=rel_tol,
                                 max_panels=max_panels, truncation_nats=nats)
            right = log_integrate(log_f, 0.0, math.inf, scale=scale, rel_tol=rel_tol,
                                  max_panels=max_panels, truncation_nats=nats)
            return _combine(left, right)
        mirrored = log_integrate(lambda x: log_f(-x), -b, math.inf, scale=scale,
                                 rel_tol=rel_tol, max_panels=max_panels, truncation_nats=nats)
        return LogQuadResult(mirrored.log_value, mirrored.rel_error, mirrored.n_panels, b)

    if not b > a:
        raise QuadratureError(f"empty integration range [{a:.6g}, {b:.6g}]")

    if b == math.inf:
        panels = _expand(log_f, a, scale, nats)
    else:
        n_init = int(min(64, max(1, math.ceil((b - a) / scale))))
        edges = np.linspace(a, b, n_init + 1)
        panels = [_panel(log_f, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]

    while True:
        logs = np.array([p.log_value for p in panels])
        total = float(logsumexp(logs)) if np.isfinite(logs).any() else -math.inf
        if total == -math.inf:
            return LogQuadResult(-math.inf, 0.0, len(panels), panels[-1].hi)
        weights = np.exp(logs - total) * np.array([p.rel_err for p in panels])
        rel_error = float(weights.sum())
        if rel_error <= rel_tol or len(panels) >= max_panels:
            break
        worst = int(np.argmax(weights))
        panel = panels[worst]
        mid = 0.5 * (panel.lo + panel.hi)
        panels[worst] = _panel(log_f, panel.lo, mid)
        panels.append(_panel(log_f, mid, panel.hi))

    if rel_error > rel_tol:
        logger.warning(
            "log quadrature stopped at %d panels with rel. error %.3g (target %.3g)",
            len(panels), rel_error, rel_tol,
        )
        if rel_error > _HARD_REL_TOL:
            raise QuadratureError(
                f"quadrature did not converge: rel. error {rel_error:.3g} after "
                f"{len(panels)} panels on [{a:.6g}, {panels[-1].hi:.6g}]"
            )
    return LogQuadResult(total, rel_error, len(panels), max(p.hi for p in panels))


def _combine(first: LogQuadResult, second: LogQuadResult) -> LogQuadResult:
    total = float(np.logaddexp(first.log_value, second.log_value))
    if total == -math.inf:
        return LogQuadResult(total, 0.0, first.n_panels + second.n_panels, second.upper)
    err = (
        math.exp(first.log_value - total) * first.rel_error
        + math.exp(second.log_value - total) * second.rel_error
    )
    return LogQuadResult(total, err, first.n_panels + second.n_panels, second.upper)
