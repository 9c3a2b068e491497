"""Tests for model log-mgfs, characteristic functions, strips and closed-form tails."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from smile_atlas.models.model_spec import (
    BlackScholesSpec,
    FMLSSpec,
    MertonSpec,
    NIGSpec,
    SyntheticTailSpec,
    TailSideSpec,
    parse_model_spec,
)
from smile_atlas.services.model_zoo import (
    char_fn,
    complex_log_mgf,
    critical_moments,
    drift,
    exact_log_density,
    fmls_tail_constant,
    has_exact_density,
    known_smile_asymptote,
    known_tail_asymptote,
    log_mgf,
    log_mgf_prime,
    mean,
    mgf_strip,
    nig_log_constant,
)
from smile_atlas.services.quadrature import log_integrate
from smile_atlas.services.wings import psi
from smile_atlas.utils.errors import ConditionGateError, DomainError, UnsupportedError

CLOSED_FORM_FIXTURES = ["bs_model", "merton_model", "nig_model", "fmls_model"]


class TestModelSpecs:
    def test_parse_config_keys(self) -> None:
        m = parse_model_spec({"model": "Merton", "sigma": 0.1, "lambda": 0.5, "alpha_j": -0.1, "delta_j": 0.2})
        assert isinstance(m, MertonSpec)
        assert m.lam == 0.5

    def test_nig_needs_positive_gamma(self) -> None:
        with pytest.raises(ValueError):
            NIGSpec(alpha=1.0, beta=1.5, delta=1.0, martingale=False)

    def test_nig_martingale_needs_first_moment(self) -> None:
        with pytest.raises(ValueError):
            NIGSpec(alpha=1.0, beta=0.2, delta=1.0)

    def test_merton_degenerate_jumps_rejected(self) -> None:
        with pytest.raises(ValueError):
            MertonSpec(sigma=0.2, lam=0.3, alpha_j=-0.1, delta_j=0.0)

    def test_fmls_alpha_range(self) -> None:
        with pytest.raises(ValueError):
            FMLSSpec(alpha=1.0, sigma=0.2)

    def test_synthetic_martingale_needs_exponential_rate(self) -> None:
        side = TailSideSpec(power=-3.0, linear=-0.5)
        with pytest.raises(ValueError):
            SyntheticTailSpec(right=side, left=side)

    def test_specs_are_hashable(self, nig_model) -> None:
        assert hash(nig_model) == hash(NIGSpec(alpha=2.0, beta=-0.5, delta=1.0))


class TestLogMgf:
    @pytest.mark.parametrize("fixture", CLOSED_FORM_FIXTURES + ["symmetric_synthetic"])
    def test_zero_at_origin(self, fixture: str, request) -> None:
        m = request.getfixturevalue(fixture)
        assert log_mgf(m, 0.0) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("fixture", CLOSED_FORM_FIXTURES)
    def test_martingale(self, fixture: str, request) -> None:
        m = request.getfixturevalue(fixture)
        assert math.exp(log_mgf(m, 1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_synthetic_martingale(self, nig_twin_model) -> None:
        assert log_mgf(nig_twin_model, 1.0) == pytest.approx(0.0, abs=1e-8)

    def test_black_scholes_closed_form(self, bs_model) -> None:
        z = 1.7
        assert log_mgf(bs_model, z) == pytest.approx(-0.02 * z + 0.02 * z * z, rel=1e-14)
        assert log_mgf_prime(bs_model, z) == pytest.approx(-0.02 + 0.04 * z, rel=1e-14)

    def test_nig_finite_on_closed_edge(self, nig_model) -> None:
        assert math.isfinite(log_mgf(nig_model, 2.5))
        assert log_mgf_prime(nig_model, 2.5) == math.inf

    def test_nig_outside_strip(self, nig_model) -> None:
        with pytest.raises(DomainError) as exc_info:
            log_mgf(nig_model, 3.0)
        assert exc_info.value.boundary == 2.5

    def test_fmls_left_of_origin(self, fmls_model) -> None:
        with pytest.raises(DomainError) as exc_info:
            log_mgf(fmls_model, -0.5)
        assert exc_info.value.boundary == 0.0

    @pytest.mark.parametrize("fixture", ["merton_model", "nig_model", "fmls_model"])
    def test_convex(self, fixture: str, request) -> None:
        m = request.getfixturevalue(fixture)
        zs = np.linspace(0.05, 2.0, 40)
        values = np.array([log_mgf(m, float(z)) for z in zs])
        assert np.all(np.diff(values, 2) >= -1e-12)

    def test_vector_input(self, merton_model) -> None:
        out = log_mgf(merton_model, np.array([0.0, 0.5, 1.0]))
        assert out.shape == (3,)

    def test_synthetic_derivative_matches_difference(self, symmetric_synthetic) -> None:
        h = 1e-4
        numeric = (log_mgf(symmetric_synthetic, 0.5 + h) - log_mgf(symmetric_synthetic, 0.5 - h)) / (2 * h)
        assert log_mgf_prime(symmetric_synthetic, 0.5) == pytest.approx(numeric, abs=1e-5)

    def test_symmetric_synthetic_has_zero_mean(self, symmetric_synthetic) -> None:
        assert mean(symmetric_synthetic) == pytest.approx(0.0, abs=1e-8)

    def test_synthetic_has_no_complex_mgf(self, symmetric_synthetic) -> None:
        with pytest.raises(UnsupportedError):
            complex_log_mgf(symmetric_synthetic)


class TestCharFn:
    @pytest.mark.parametrize("fixture", CLOSED_FORM_FIXTURES)
    def test_one_at_origin(self, fixture: str, request) -> None:
        m = request.getfixturevalue(fixture)
        assert char_fn(m, 0.0) == pytest.approx(1.0 + 0.0j, abs=1e-14)

    @pytest.mark.parametrize("fixture", ["merton_model", "nig_model", "fmls_model"])
    def test_conjugate_symmetry(self, fixture: str, request) -> None:
        m = request.getfixturevalue(fixture)
        u = np.array([0.3, 1.7, 5.0])
        np.testing.assert_allclose(char_fn(m, -u), np.conj(char_fn(m, u)), rtol=1e-12)

    @pytest.mark.parametrize(
        "fixture, h",
        [(name, 1e-8) for name in CLOSED_FORM_FIXTURES] + [("nig_twin_model", 1e-3)],
        ids=["bs", "merton", "nig", "fmls", "synthetic"],
    )
    def test_slope_at_origin_matches_mgf(self, fixture: str, h: float, request) -> None:
        """φ'(0) = i K'(0) = i E[X]."""
        m = request.getfixturevalue(fixture)
        slope = (char_fn(m, h) - char_fn(m, -h)) / (2.0 * h)
        assert slope.real == pytest.approx(0.0, abs=1e-4)
        assert slope.imag == pytest.approx(log_mgf_prime(m, 0.0), abs=1e-4)

    @pytest.mark.parametrize("fixture", CLOSED_FORM_FIXTURES)
    def test_continuation_to_real_axis(self, fixture: str, request) -> None:
        """The kernel of φ taken at u = -iz gives E e^{zX}."""
        m = request.getfixturevalue(fixture)
        kernel = complex_log_mgf(m)
        for z in (0.5, 1.0, 2.0):
            value = np.exp(kernel(1j * (-1j * z)))
            assert value == pytest.approx(math.exp(log_mgf(m, z)), rel=1e-12)

    def test_fmls_gaussian_limit(self) -> None:
        """α = 2 is Gaussian with variance 2σ²T."""
        m = FMLSSpec(alpha=2.0, sigma=0.2)
        u = 1.3
        expected = np.exp(-0.04j * u - 0.04 * u * u)
        assert char_fn(m, u) == pytest.approx(expected, rel=1e-12)

    def test_synthetic_modulus_bounded(self, symmetric_synthetic) -> None:
        phi = char_fn(symmetric_synthetic, 2.0)
        assert abs(phi) <= 1.0
        assert phi.imag == pytest.approx(0.0, abs=1e-8)


class TestStripsAndMoments:
    def test_black_scholes_all_moments(self, bs_model) -> None:
        cond = critical_moments(bs_model)
        assert cond.p_plus == math.inf and cond.q_minus == math.inf

    def test_nig(self, nig_model) -> None:
        cond = critical_moments(nig_model)
        assert cond.p_plus == pytest.approx(2.5)
        assert cond.q_minus == pytest.approx(1.5)
        assert cond.ir_holds and cond.il_holds

    def test_fmls(self, fmls_model) -> None:
        cond = critical_moments(fmls_model)
        assert cond.p_plus == math.inf
        assert cond.q_minus == 0.0
        assert not cond.il_holds

    def test_synthetic_uses_exponential_rates(self, exponential_synthetic) -> None:
        strip = mgf_strip(exponential_synthetic)
        assert (strip.lo, strip.hi) == (-2.0, 3.0)
        assert not strip.hi_closed

    def test_closed_strip_for_fast_power_decay(self, symmetric_synthetic) -> None:
        strip = mgf_strip(symmetric_synthetic)
        assert strip.lo_closed and strip.hi_closed
        assert strip.contains(2.0)


class TestDensities:
    def test_black_scholes_density(self, bs_model) -> None:
        x = np.array([-1.0, 0.0, 0.7])
        np.testing.assert_allclose(exact_log_density(bs_model, x), norm.logpdf(x, -0.02, 0.2), rtol=1e-14)

    def test_merton_vanishing_intensity(self) -> None:
        merton = MertonSpec(sigma=0.2, lam=1e-12, alpha_j=0.2, delta_j=0.15)
        bs = BlackScholesSpec(sigma=0.2)
        x = np.linspace(-0.5, 0.5, 11)
        np.testing.assert_allclose(exact_log_density(merton, x), exact_log_density(bs, x), rtol=1e-9)

    def test_merton_density_normalized(self, merton_model) -> None:
        res = log_integrate(lambda x: exact_log_density(merton_model, x), -math.inf, math.inf, scale=0.2)
        assert res.log_value == pytest.approx(0.0, abs=1e-8)

    def test_synthetic_density_normalized(self, nig_twin_model) -> None:
        res = log_integrate(lambda x: exact_log_density(nig_twin_model, x), -math.inf, math.inf, scale=0.5)
        assert res.log_value == pytest.approx(0.0, abs=1e-8)

    def test_nig_has_no_exact_density(self, nig_model) -> None:
        assert not has_exact_density(nig_model)
        with pytest.raises(UnsupportedError):
            exact_log_density(nig_model, 0.0)

    def test_lattice_merton_has_no_density(self, merton_lattice) -> None:
        with pytest.raises(UnsupportedError):
            exact_log_density(merton_lattice, 0.0)


class TestKnownAsymptotes:
    def test_fmls_constants(self, fmls_model) -> None:
        assert fmls_tail_constant(fmls_model, as_printed=True) == pytest.approx(250.0 / 9.0, rel=1e-12)
        assert fmls_tail_constant(fmls_model) == pytest.approx(250.0 / 27.0, rel=1e-12)

    def test_fmls_constant_gaussian_limit(self) -> None:
        """At α = 2 the Legendre constant is 1/(4σ²T)."""
        m = FMLSSpec(alpha=2.0, sigma=0.2)
        assert fmls_tail_constant(m) == pytest.approx(1.0 / (4.0 * 0.04), rel=1e-12)

    def test_fmls_left_refused(self, fmls_model) -> None:
        with pytest.raises(ConditionGateError):
            known_tail_asymptote(fmls_model, "left")

    def test_nig_density_rate(self, nig_model) -> None:
        tail = known_tail_asymptote(nig_model, "right")
        k = 1e6
        assert -tail(np.array([k]))[0] / k == pytest.approx(2.5, rel=1e-4)
        assert tail.kind == "density"

    def test_nig_log_constant(self, nig_model) -> None:
        expected = math.log(1.0) + 0.5 * math.log(2.0 / (2.0 * math.pi)) + math.sqrt(3.75)
        assert nig_log_constant(nig_model) == pytest.approx(expected, rel=1e-14)

    def test_nig_twin_tails(self, nig_twin_model, nig_model) -> None:
        assert nig_twin_model.right.linear == -2.5
        assert nig_twin_model.left.linear == -1.5
        assert nig_twin_model.right.log_c == pytest.approx(nig_log_constant(nig_model))
        assert critical_moments(nig_twin_model) == critical_moments(nig_model)

    def test_merton_tail_domain(self, merton_model) -> None:
        tail = known_tail_asymptote(merton_model, "right")
        assert tail.kind == "cdf_tail"
        assert tail.k_min == 1.0

    def test_merton_left_gaussian_tail_without_jump_spread(self, merton_fixed_jumps) -> None:
        tail = known_tail_asymptote(merton_fixed_jumps, "left")
        assert tail(np.array([2.0]))[0] == pytest.approx(-4.0 / 0.08, rel=1e-14)

    def test_smile_asymptote_nig(self, nig_model) -> None:
        right = known_smile_asymptote(nig_model, "right")
        assert right(np.array([10.0]))[0] == pytest.approx(10.0 * psi(1.5), rel=1e-14)

    def test_smile_asymptote_black_scholes_flat(self, bs_model) -> None:
        np.testing.assert_allclose(known_smile_asymptote(bs_model)(np.array([1.0, 5.0])), 0.04)

    def test_drift_is_martingale_correction(self, merton_model) -> None:
        expected = -0.02 - 0.3 * math.expm1(0.2 + 0.5 * 0.15**2)
        assert drift(merton_model) == pytest.approx(expected, rel=1e-14)
