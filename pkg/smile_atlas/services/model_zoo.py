"""
Model zoo: log-mgfs, characteristic functions, critical moments, closed-form
tail asymptotes and exact log-densities for the supported return models.

All models describe X = log(S_T/F_T). With `martingale=True` the drift is
chosen so that K(1) = log E e^X = 0.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp
from scipy.stats import norm, poisson

from smile_atlas.config import settings
from smile_atlas.models.model_spec import (
    BlackScholesSpec,
    FMLSSpec,
    MertonSpec,
    ModelSpec,
    NIGSpec,
    SyntheticTailSpec,
    TailSideSpec,
)
from smile_atlas.models.tails import MomentCondition, Side, TailFunction
from smile_atlas.services.quadrature import decay_length, log_integrate
from smile_atlas.services.wings import psi
from smile_atlas.utils.errors import (
    ConditionGateError,
    DomainError,
    NumericalError,
    UnsupportedError,
)
from smile_atlas.utils.logging import get_logger

logger = get_logger(__name__)

_POISSON_CHUNK = 64
_POISSON_MAX_CHUNKS = 2000


class MgfStrip(NamedTuple):
    """Real z with E e^{zX} < inf; endpoints included when the flags say so."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, z: float) -> bool:
        above = z > self.lo or (self.lo_closed and z == self.lo)
        below = z < self.hi or (self.hi_closed and z == self.hi)
        return above and below


# ---------------------------------------------------------------------------
# Drift and mgf strip
# ---------------------------------------------------------------------------


def fmls_scale(m: FMLSSpec) -> float:
    """A = -(σ_T)^α sec(πα/2) > 0, so that K(z) = zθ + A z^α."""
    return -(m.T * m.sigma**m.alpha) / math.cos(math.pi * m.alpha / 2.0)


def drift(m: ModelSpec) -> float:
    """Coefficient of z in K(z) over the whole horizon (the location of X)."""
    if isinstance(m, BlackScholesSpec):
        return -0.5 * m.sigma**2 * m.T if m.martingale else m.mu * m.T
    if isinstance(m, MertonSpec):
        if not m.martingale:
            return m.mu * m.T
        jump = math.expm1(m.alpha_j + 0.5 * m.delta_j**2)
        return (-0.5 * m.sigma**2 - m.lam * jump) * m.T
    if isinstance(m, NIGSpec):
        if not m.martingale:
            return m.mu * m.T
        return -m.delta * (m.gamma - math.sqrt(m.alpha**2 - (m.beta + 1.0) ** 2)) * m.T
    if isinstance(m, FMLSSpec):
        return -fmls_scale(m) if m.martingale else m.mu * m.T
    return _synthetic_profile(m).shift


def _side_closed(side: TailSideSpec) -> bool:
    """Is e^{rate·y} f(y) still integrable at exactly the exponential rate?"""
    return (side.stretch < 0.0 and side.rho < 1.0) or side.power < -1.0


def mgf_strip(m: ModelSpec) -> MgfStrip:
    if isinstance(m, (BlackScholesSpec, MertonSpec)):
        return MgfStrip(-math.inf, math.inf)
    if isinstance(m, NIGSpec):
        return MgfStrip(-m.alpha - m.beta, m.alpha - m.beta, True, True)
    if isinstance(m, FMLSSpec):
        return MgfStrip(0.0, math.inf, True, False)
    p, q = m.right.exponential_rate, m.left.exponential_rate
    return MgfStrip(
        -q, p,
        math.isfinite(q) and _side_closed(m.left),
        math.isfinite(p) and _side_closed(m.right),
    )


def critical_moments(m: ModelSpec) -> MomentCondition:
    """p_plus = sup{p: E e^{pX} < inf}, q_minus = sup{q: E e^{-qX} < inf}."""
    strip = mgf_strip(m)
    return MomentCondition(p_plus=strip.hi, q_minus=-strip.lo)


def _check_real_domain(m: ModelSpec, z: np.ndarray) -> None:
    strip = mgf_strip(m)
    for value in np.atleast_1d(np.real(z)):
        if not strip.contains(float(value)):
            boundary = strip.hi if value >= strip.hi else strip.lo
            raise DomainError(
                f"z={value:.6g} is outside the mgf domain of the {m.family} model "
                f"[{strip.lo:.6g}, {strip.hi:.6g}]",
                boundary=boundary,
            )


# ---------------------------------------------------------------------------
# Log-mgf and characteristic function
# ---------------------------------------------------------------------------


def _fmls_power(m: FMLSSpec, z: np.ndarray) -> np.ndarray:
    """z^α on the principal branch, with 0^α = 0."""
    safe = np.where(z == 0, 1.0, z)
    powered = np.power(safe, m.alpha)
    return np.where(z == 0, 0.0, powered)


def _closed_form_log_mgf(m: ModelSpec, z: np.ndarray) -> np.ndarray:
    loc = drift(m)
    if isinstance(m, BlackScholesSpec):
        return loc * z + 0.5 * z * z * m.sigma**2 * m.T
    if isinstance(m, MertonSpec):
        jumps = np.exp(z * m.alpha_j + 0.5 * z * z * m.delta_j**2) - 1.0
        return loc * z + m.T * (0.5 * z * z * m.sigma**2 + m.lam * jumps)
    if isinstance(m, NIGSpec):
        root = np.sqrt(m.alpha**2 - (m.beta + z) ** 2)
        return loc * z + m.T * m.delta * (m.gamma - root)
    return loc * z + fmls_scale(m) * _fmls_power(m, z)


def log_mgf(m: ModelSpec, z):
    """
    K(z) = log E e^{zX}. Real z must lie in the mgf strip; complex z are
    evaluated by analytic continuation (closed-form families only).
    """
    zs = np.asarray(z)
    is_complex = np.iscomplexobj(zs)
    if isinstance(m, SyntheticTailSpec):
        if is_complex and np.any(np.imag(zs) != 0.0):
            raise UnsupportedError("the synthetic family has no closed-form complex log-mgf; use char_fn")
        zr = np.real(zs).astype(float)
        _check_real_domain(m, zr)
        out = np.array([_synthetic_log_mgf(m, float(v)) for v in np.atleast_1d(zr)])
        return float(out[0]) if zs.ndim == 0 else out.reshape(zs.shape)
    if is_complex:
        # The strip is a condition on Re z only.
        _check_real_domain(m, np.real(zs))
        out = _closed_form_log_mgf(m, zs.astype(complex))
        return complex(out) if zs.ndim == 0 else out
    zr = zs.astype(float)
    _check_real_domain(m, zr)
    with np.errstate(over="ignore"):
        out = _closed_form_log_mgf(m, zr)
    return float(out) if zs.ndim == 0 else out


def complex_log_mgf(m: ModelSpec) -> Callable[[complex], complex]:
    """Scalar complex K for the Fourier routines."""
    if isinstance(m, SyntheticTailSpec):
        raise UnsupportedError("the synthetic family is priced from its density, not its transform")

    def evaluate(z: complex) -> complex:
        return complex(_closed_form_log_mgf(m, np.asarray(z, dtype=complex)))

    return evaluate


def log_mgf_prime(m: ModelSpec, z: float) -> float:
    """K'(z): closed form, or the tilted first moment by quadrature for synthetic tails."""
    _check_real_domain(m, np.asarray(z, dtype=float))
    loc = drift(m)
    if isinstance(m, BlackScholesSpec):
        return loc + z * m.sigma**2 * m.T
    if isinstance(m, MertonSpec):
        with np.errstate(over="ignore"):
            growth = float(np.exp(z * m.alpha_j + 0.5 * z * z * m.delta_j**2))
        return loc + m.T * (z * m.sigma**2 + m.lam * (m.alpha_j + z * m.delta_j**2) * growth)
    if isinstance(m, NIGSpec):
        inner = m.alpha**2 - (m.beta + z) ** 2
        if inner <= 0.0:
            return math.inf if z > 0 else -math.inf
        return loc + m.T * m.delta * (m.beta + z) / math.sqrt(inner)
    if isinstance(m, FMLSSpec):
        if z == 0.0:
            return loc
        return loc + m.alpha * fmls_scale(m) * z ** (m.alpha - 1.0)
    return _synthetic_log_mgf_prime(m, z)


def mean(m: ModelSpec) -> float:
    """E X = K'(0)."""
    return log_mgf_prime(m, 0.0)


def char_fn(m: ModelSpec, u):
    """φ(u) = E e^{iuX}; φ(0) = 1 and conj(φ(u)) = φ(-u)."""
    us = np.asarray(u, dtype=float)
    if isinstance(m, SyntheticTailSpec):
        out = np.array([_synthetic_char_fn(m, float(v)) for v in np.atleast_1d(us)])
        return complex(out[0]) if us.ndim == 0 else out.reshape(us.shape)
    out = np.exp(_closed_form_log_mgf(m, 1j * us))
    return complex(out) if us.ndim == 0 else out


# ---------------------------------------------------------------------------
# Synthetic tails
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _SyntheticProfile:
    a: float
    b: float
    c_right: float
    c_left: float
    log_norm: float
    shift: float


def _side_log_kernel(side: TailSideSpec, y: np.ndarray) -> np.ndarray:
    yy = np.maximum(y, 1.0)
    return side.log_c + side.power * np.log(yy) + side.linear * yy + side.stretch * yy**side.rho


def _bridge(m: SyntheticTailSpec) -> Tuple[float, float, float, float]:
    """C¹ two-piece quadratic on [-1, 1] sharing value and slope at 0."""
    v_r = m.right.log_c + m.right.linear + m.right.stretch
    s_r = m.right.power + m.right.linear + m.right.stretch * m.right.rho
    v_l = m.left.log_c + m.left.linear + m.left.stretch
    # slope in x at x = -1 is minus the slope in the distance y
    s_l = -(m.left.power + m.left.linear + m.left.stretch * m.left.rho)
    a = 0.5 * (v_r - 0.5 * s_r + v_l + 0.5 * s_l)
    b = (v_r - 0.5 * s_r) - (v_l + 0.5 * s_l)
    return a, b, 0.5 * (s_r - b), 0.5 * (b - s_l)


def _unnormalized_log_density(m: SyntheticTailSpec, bridge, y: np.ndarray) -> np.ndarray:
    a, b, c_r, c_l = bridge
    y = np.asarray(y, dtype=float)
    inner = a + b * y + np.where(y >= 0.0, c_r, c_l) * y * y
    right = _side_log_kernel(m.right, y)
    left = _side_log_kernel(m.left, -y)
    return np.where(y >= 1.0, right, np.where(y <= -1.0, left, inner))


def _log_integral_pieces(log_f: Callable[[np.ndarray], np.ndarray], lower: float, upper: float) -> float:
    """log ∫ exp(log_f) over [lower, upper] ∩ R, split at ±1 and 0."""
    edges = [-math.inf, -1.0, 0.0, 1.0, math.inf]
    logs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        lo, hi = max(lo, lower), min(hi, upper)
        if not hi > lo:
            continue
        if hi == math.inf:
            scale = decay_length(log_f, lo, ceiling=1.0)
        elif lo == -math.inf:
            scale = decay_length(lambda t: log_f(-t), -hi, ceiling=1.0)
        else:
            scale = hi - lo
        logs.append(log_integrate(log_f, lo, hi, scale=scale).log_value)
    return float(logsumexp(logs)) if logs else -math.inf


@lru_cache(maxsize=128)
def _synthetic_profile(m: SyntheticTailSpec) -> _SyntheticProfile:
    bridge = _bridge(m)

    def kernel(y: np.ndarray) -> np.ndarray:
        return _unnormalized_log_density(m, bridge, y)

    log_norm = _log_integral_pieces(kernel, -math.inf, math.inf)
    if m.martingale:
        log_first = _log_integral_pieces(lambda y: y + kernel(y), -math.inf, math.inf)
        shift = -(log_first - log_norm)
    else:
        shift = m.mu
    logger.debug("synthetic profile: log_norm=%.12g shift=%.12g", log_norm, shift)
    return _SyntheticProfile(*bridge, log_norm=log_norm, shift=shift)


def _synthetic_log_density(m: SyntheticTailSpec, x: np.ndarray) -> np.ndarray:
    prof = _synthetic_profile(m)
    bridge = (prof.a, prof.b, prof.c_right, prof.c_left)
    return _unnormalized_log_density(m, bridge, np.asarray(x, dtype=float) - prof.shift) - prof.log_norm


def _synthetic_log_mgf(m: SyntheticTailSpec, z: float) -> float:
    if z == 0.0:
        return 0.0
    return _log_integral_pieces(lambda x: z * x + _synthetic_log_density(m, x), -math.inf, math.inf)


def _synthetic_log_mgf_prime(m: SyntheticTailSpec, z: float) -> float:
    def tilted(x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return z * x + _synthetic_log_density(m, x) + np.log(np.abs(x))

    log_pos = _log_integral_pieces(tilted, 0.0, math.inf)
    log_neg = _log_integral_pieces(tilted, -math.inf, 0.0)
    log_total = _synthetic_log_mgf(m, z)
    return math.exp(log_pos - log_total) - math.exp(log_neg - log_total)


def _synthetic_char_fn(m: SyntheticTailSpec, u: float) -> complex:
    if u == 0.0:
        return 1.0 + 0.0j

    def right(x: float) -> float:
        return math.exp(float(_synthetic_log_density(m, np.array([x]))[0]))

    def left(x: float) -> float:
        return right(-x)

    opts = dict(weight="cos", wvar=u, limlst=200)
    re = quad(right, 0.0, np.inf, **opts)[0] + quad(left, 0.0, np.inf, **opts)[0]
    opts["weight"] = "sin"
    im = quad(right, 0.0, np.inf, **opts)[0] - quad(left, 0.0, np.inf, **opts)[0]
    return complex(re, im)


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------


def poisson_mixture(m: MertonSpec, log_component: Callable, x, log_bound=None) -> np.ndarray:
    """
    log Σ_n P(N = n) exp(log_component(mean_n, var_n, x)), N ~ Poisson(λT),
    with mean_n = drift + n α_J and var_n = σ²T + n δ_J². Summation stops
    once the newest terms sit TRUNCATION_NATS below the running maximum and
    are decreasing.

    `log_bound` is an upper bound on log_component (0 for probabilities).
    With it, a sum that is still empty stops returning -inf once the
    remaining Poisson mass times e^bound falls below REACH_LOG_PRICE.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    intensity = m.lam * m.T
    loc = drift(m)
    nats = settings.TRUNCATION_NATS
    total = np.full(xs.shape, -math.inf)
    running = np.full(xs.shape, -math.inf)
    if log_bound is not None:
        bound = np.broadcast_to(np.asarray(log_bound, dtype=float), xs.shape)
    for chunk in range(_POISSON_MAX_CHUNKS):
        n = np.arange(chunk * _POISSON_CHUNK, (chunk + 1) * _POISSON_CHUNK, dtype=float)[:, None]
        log_weight = -intensity + n * math.log(intensity) - gammaln(n + 1.0)
        mean_n = loc + n * m.alpha_j
        var_n = m.sigma**2 * m.T + n * m.delta_j**2
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = log_weight + log_component(mean_n, var_n, xs[None, :])
            total = np.logaddexp(total, logsumexp(terms, axis=0))
        running = np.maximum(running, terms.max(axis=0))
        last, previous = terms[-1], terms[-2]
        done = (last < running - nats) & (last <= previous)
        if log_bound is not None:
            log_rest = float(poisson.logsf(n[-1, 0], intensity))
            done |= np.isneginf(running) & (log_rest + bound < settings.REACH_LOG_PRICE)
        if done.all():
            return total
    raise NumericalError(
        f"Poisson mixture did not settle after {_POISSON_MAX_CHUNKS * _POISSON_CHUNK} jump terms"
    )


def _gaussian_log_pdf(mean_n: np.ndarray, var_n: np.ndarray, x: np.ndarray) -> np.ndarray:
    safe = np.where(var_n > 0.0, var_n, 1.0)
    values = -0.5 * (x - mean_n) ** 2 / safe - 0.5 * np.log(2.0 * math.pi * safe)
    # Zero-variance components are atoms and carry no density.
    return np.where(var_n > 0.0, values, -math.inf)


def exact_log_density(m: ModelSpec, x):
    """
    log f(x) for Black-Scholes, Merton (Poisson-weighted Gaussian series,
    the continuous part when σ = 0) and synthetic tails.
    """
    xs = np.asarray(x, dtype=float)
    if isinstance(m, BlackScholesSpec):
        out = norm.logpdf(xs, loc=drift(m), scale=m.sigma * math.sqrt(m.T))
    elif isinstance(m, MertonSpec):
        if m.sigma == 0.0 and m.delta_j == 0.0:
            raise UnsupportedError("Merton with sigma = 0 and delta_j = 0 is a lattice law without a density")
        out = poisson_mixture(m, _gaussian_log_pdf, xs).reshape(xs.shape)
    elif isinstance(m, SyntheticTailSpec):
        out = _synthetic_log_density(m, xs)
    else:
        raise UnsupportedError(
            f"no exact density for the {m.family} family; its tails come from transform inversion"
        )
    return float(out) if xs.ndim == 0 else out


def has_exact_density(m: ModelSpec) -> bool:
    if isinstance(m, MertonSpec):
        return m.sigma > 0.0 or m.delta_j > 0.0
    return isinstance(m, (BlackScholesSpec, SyntheticTailSpec))


# ---------------------------------------------------------------------------
# Closed-form asymptotes
# ---------------------------------------------------------------------------


def nig_log_constant(m: NIGSpec) -> float:
    """log C in f(x) ~ C |x|^{-3/2} e^{-α|x| + βx}, from K1(z) ~ √(π/2z) e^{-z}."""
    delta_t = m.delta * m.T
    return math.log(delta_t) + 0.5 * math.log(m.alpha / (2.0 * math.pi)) + delta_t * m.gamma


def fmls_tail_constant(m: FMLSSpec, as_printed: bool = False) -> float:
    """
    C in -log F̄(k) ~ C k^{α/(α-1)}.

    The default is the Legendre transform of A z^α,
    ((α-1)/α) [Tασ^α |sec(πα/2)|]^{-1/(α-1)}, which gives 1/(4σ²T) at α = 2.
    `as_printed=True` drops the (α-1)/α factor.
    """
    if m.sigma == 0.0:
        raise UnsupportedError("FMLS with sigma = 0 is degenerate: the right tail is empty")
    base = m.T * m.alpha * m.sigma**m.alpha / abs(math.cos(math.pi * m.alpha / 2.0))
    printed = base ** (-1.0 / (m.alpha - 1.0))
    return printed if as_printed else (m.alpha - 1.0) / m.alpha * printed


def nig_twin(m: NIGSpec) -> SyntheticTailSpec:
    """Synthetic model with the NIG density asymptote on both sides."""
    log_c = nig_log_constant(m)
    return SyntheticTailSpec(
        right=TailSideSpec(log_c=log_c, power=-1.5, linear=-(m.alpha - m.beta)),
        left=TailSideSpec(log_c=log_c, power=-1.5, linear=-(m.alpha + m.beta)),
        martingale=m.martingale,
        mu=m.mu * m.T,
        T=m.T,
    )


def _mirror(side: Side) -> float:
    return 1.0 if side == "right" else -1.0


def known_tail_asymptote(m: ModelSpec, side: Side = "right", as_printed: bool = False) -> TailFunction:
    """
    Closed-form log-tail in the wing distance k > 0: a density for
    Black-Scholes, NIG and synthetic tails, a cdf tail for FMLS and Merton.
    """
    sign = _mirror(side)
    if isinstance(m, (BlackScholesSpec, SyntheticTailSpec)):
        return TailFunction(
            side=side, kind="density", label=f"{m.family}:log f",
            evaluator=lambda k: exact_log_density(m, sign * k),
        )
    if isinstance(m, NIGSpec):
        log_c = nig_log_constant(m)
        rate = m.alpha - m.beta if side == "right" else m.alpha + m.beta
        return TailFunction(
            side=side, kind="density", label="nig:C k^-3/2 e^-rate k",
            evaluator=lambda k: log_c - 1.5 * np.log(k) - rate * k,
        )
    if isinstance(m, FMLSSpec):
        if side == "left":
            raise ConditionGateError(
                "left", 0.0,
                "(IL) fails for FMLS: the left tail is a power law, so E[exp(-eps X)] is infinite",
            )
        const = fmls_tail_constant(m, as_printed)
        exponent = m.alpha / (m.alpha - 1.0)
        return TailFunction(
            side=side, kind="cdf_tail", label="fmls:-C k^(α/(α-1))",
            evaluator=lambda k: -const * k**exponent,
        )
    # Merton
    if m.delta_j > 0.0:
        delta = m.delta_j
        return TailFunction(
            side=side, kind="cdf_tail", k_min=1.0, label="merton:-(k/δ)√(2 log k)",
            evaluator=lambda k: -(k / delta) * np.sqrt(2.0 * np.log(k)),
        )
    if side == "right":
        alpha_j = m.alpha_j
        return TailFunction(
            side=side, kind="cdf_tail", k_min=1.0, label="merton:-(k/α) log k",
            evaluator=lambda k: -(k / alpha_j) * np.log(k),
        )
    if m.sigma == 0.0:
        raise UnsupportedError("Merton with sigma = 0 and upward jumps has a bounded left tail")
    variance = m.sigma**2 * m.T
    return TailFunction(
        side=side, kind="cdf_tail", label="merton:-k²/(2σ²T)",
        evaluator=lambda k: -k * k / (2.0 * variance),
    )


def known_smile_asymptote(
    m: ModelSpec, side: Side = "right", as_printed: bool = False
) -> Callable[[np.ndarray], np.ndarray]:
    """Predicted V(k)² in the wing distance k, in closed form."""
    if isinstance(m, BlackScholesSpec):
        variance = m.sigma**2 * m.T
        return lambda k: np.full(np.shape(k), variance, dtype=float)

    if isinstance(m, NIGSpec):
        rate = m.alpha - m.beta - 1.0 if side == "right" else m.alpha + m.beta
        slope = psi(rate)
        return lambda k: slope * np.asarray(k, dtype=float)
    if isinstance(m, FMLSSpec):
        if side == "left":
            raise ConditionGateError("left", 0.0, "(IL) fails for FMLS")
        const = fmls_tail_constant(m, as_printed)
        power = 2.0 - m.alpha / (m.alpha - 1.0)
        return lambda k: np.asarray(k, dtype=float) ** power / (2.0 * const)
    if isinstance(m, MertonSpec):
        if m.delta_j > 0.0:
            return lambda k: m.delta_j * k / (2.0 * np.sqrt(2.0 * np.log(k)))
        if side == "right":
            return lambda k: m.alpha_j * k / (2.0 * np.log(k))
        variance = m.sigma**2 * m.T
        return lambda k: np.full(np.shape(k), variance, dtype=float)
    tail = m.right if side == "right" else m.left
    rate = tail.exponential_rate
    if math.isfinite(rate):
        slope = psi(max(rate - 1.0, 0.0) if side == "right" else rate)
        return lambda k: slope * np.asarray(k, dtype=float)
    if tail.stretch < 0.0:
        return lambda k: np.asarray(k, dtype=float) ** (2.0 - tail.rho) / (2.0 * abs(tail.stretch))
    raise UnsupportedError("synthetic tail without an exponential or stretched decay")
