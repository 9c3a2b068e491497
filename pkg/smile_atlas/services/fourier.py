"""
Transform inversions for models known through their log-mgf K(z).

Contours run along Re z = c inside the mgf strip. Factoring out the
real-axis value e^{K(c) - c x} leaves an integral of order one, so tail
probabilities and prices far below the smallest double come out as logs:

    P(X > x)  =  (1/π) ∫_0^∞ Re[ M(c+iu) e^{-(c+iu)x} / (c+iu) ] du,   c > 0
    P(X < x)  = -(1/π) ∫_0^∞ Re[ ... ] du,                             c < 0
    E(e^X - e^k)^+ = (1/π) ∫_0^∞ Re[ M(z) e^{-(z-1)k} / (z(z-1)) ] du, c > 1

With c < 0 the last integral is the put; with 0 < c < 1 it is call - 1.
Choosing c at the saddle point K'(c) = x makes the integrand smooth and
non-oscillating near u = 0.
"""

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import quad

from smile_atlas.config import settings
from smile_atlas.utils.errors import QuadratureError
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)

ComplexLogMgf = Callable[[complex], complex]

_REL_TOL = 1e-11
_MAX_DOUBLINGS = 60


@dataclass
class ContourResult:
    log_value: float
    rel_error: float
    abscissa: float


def _cutoff(log_envelope: Callable[[float], float], start: float) -> float:
    """Smallest u = start * 2^j where the integrand envelope is TRUNCATION_NATS down."""
    u = start
    for _ in range(_MAX_DOUBLINGS):
        if log_envelope(u) < -settings.TRUNCATION_NATS:
            return u
        u *= 2.0
    raise QuadratureError(
        f"transform does not decay: envelope still above e^-{settings.TRUNCATION_NATS:g} at u={u:.3g}"
    )


def _quad(
    integrand: Callable[[float], float], upper: float, near: float = 1.0
) -> Tuple[float, float]:
    # Breakpoints resolve features of width `near` at the origin.
    points = near * 4.0 ** np.arange(40)
    points = points[points < upper]
    result = quad(
        integrand, 0.0, upper, points=points if points.size else None,
        limit=settings.FOURIER_LIMIT, epsabs=0.0, epsrel=_REL_TOL, full_output=1,
    )
    value, abserr = result[0], result[1]
    if len(result) > 3:
        logger.warning("quad on [0, %.4g]: %s", upper, result[3].splitlines()[0])
    return float(value), float(abserr)


def strip_integral(
    log_mgf: ComplexLogMgf,
    c: float,
    shift: float,
    denominator: Callable[[complex], complex],
    near: float = 1.0,
) -> Tuple[float, float, float]:
    """
    (1/π) ∫_0^∞ Re[exp(K(c+iu) - K(c) - iu·shift) / denominator(c+iu)] du.

    Returns (K(c), value, abserr).
    """
    k_c = float(np.real(log_mgf(complex(c, 0.0))))
    if not math.isfinite(k_c):
        raise QuadratureError(f"K({c:.6g}) is not finite; abscissa outside the mgf strip")

    def log_envelope(u: float) -> float:
        z = complex(c, u)
        return float(np.real(log_mgf(z))) - k_c - math.log(abs(denominator(z)))

    def integrand(u: float) -> float:
        z = complex(c, u)
        return float(np.real(np.exp(log_mgf(z) - k_c - 1j * u * shift) / denominator(z))) / math.pi

    upper = _cutoff(log_envelope, start=1.0)
    value, abserr = _quad(integrand, upper, near)
    return k_c, value, abserr


def log_tail_contour(
    log_mgf: ComplexLogMgf, x: float, c: float, near: float = 1.0
) -> ContourResult:
    """log P(X > x) for c > 0, log P(X < x) for c < 0; `near` is the distance from c to the closest singularity."""
    if c == 0.0:
        raise QuadratureError("the tail contour cannot pass through the pole at z = 0")
    k_c, value, abserr = strip_integral(log_mgf, c, x, lambda z: z, near)
    if c < 0.0:
        value = -value
    if not value > 0.0:
        raise QuadratureError(
            f"tail contour at c={c:.6g}, x={x:.6g} lost all digits (integral {value:.3g})"
        )
    return ContourResult(k_c - c * x + math.log(value), abserr / value, c)


def lewis_integral(
    log_mgf: ComplexLogMgf, k: float, c: float, near: float = 1.0
) -> Tuple[float, float, float]:
    """
    Raw Lewis integral along Re z = c at log-strike k: (log scale, value,
    abserr) with the option value equal to exp(log scale) * value.
    """
    if c in (0.0, 1.0):
        raise QuadratureError("the Lewis contour cannot pass through the poles at z = 0, 1")
    k_c, value, abserr = strip_integral(log_mgf, c, k, lambda z: z * (z - 1.0), near)
    return k_c - (c - 1.0) * k, value, abserr


def log_price_contour(
    log_mgf: ComplexLogMgf, k: float, c: float, near: float = 1.0
) -> ContourResult:
    """log call (c > 1) or log put (c < 0) at log-strike k."""
    if 0.0 <= c <= 1.0:
        raise QuadratureError("log_price_contour needs c > 1 (call) or c < 0 (put)")
    log_scale, value, abserr = lewis_integral(log_mgf, k, c, near)
    if not value > 0.0:
        raise QuadratureError(
            f"Lewis contour at c={c:.6g}, k={k:.6g} lost all digits (integral {value:.3g})"
        )
    return ContourResult(log_scale + math.log(value), abserr / value, c)


def gil_pelaez_cdf(log_mgf: ComplexLogMgf, x: float) -> Tuple[float, float]:
    """
    P(X <= x) = 1/2 - (1/π) ∫_0^∞ Im[e^{-iux} φ(u)]/u du on the real line,
    with φ(u) = exp(K(iu)). Returns (probability, abserr).
    """

    def log_envelope(u: float) -> float:
        return float(np.real(log_mgf(complex(0.0, u)))) - math.log(u)

    def integrand(u: float) -> float:
        phi = np.exp(log_mgf(complex(0.0, u)) - 1j * u * x)
        return float(np.imag(phi)) / (u * math.pi)

    upper = _cutoff(log_envelope, start=1.0)
    value, abserr = _quad(integrand, upper)
    return 0.5 - value, abserr
