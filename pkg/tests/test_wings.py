"""Tests for the ψ transform and the tail-wing formulas."""

import math

import numpy as np
import pytest

from smile_atlas.models.tails import MomentCondition, TailFunction
from smile_atlas.services.blackscholes import bs_price, epsilon1_residual
from smile_atlas.services.model_zoo import known_tail_asymptote
from smile_atlas.services.pricing import price_otm, tail_cdf, tail_function
from smile_atlas.services.regvar import estimate_index, geometric_grid
from smile_atlas.services.wings import (
    PSI_SHIFT,
    SLOPE_CAP,
    check_condition,
    estimate_theta,
    implied_slope_from_price,
    lee_slope,
    left_wing,
    psi,
    psi_argument,
    psi_inverse,
    right_wing,
    sublinear_wing,
)
from smile_atlas.utils.errors import ConditionGateError, InvalidInputError

GOOD = MomentCondition(p_plus=2.5, q_minus=1.5)


def _linear_tail(side: str, kind: str, rate: float) -> TailFunction:
    return TailFunction(side=side, kind=kind, evaluator=lambda k: -rate * k, label=f"{side} {kind}")


class TestPsi:
    def test_end_points(self) -> None:
        assert psi(0.0) == 2.0
        assert psi(math.inf) == 0.0

    def test_reference_value(self) -> None:
        """ψ(1) = 2 - 4(√2 - 1)."""
        assert psi(1.0) == pytest.approx(2.0 - 4.0 * (math.sqrt(2.0) - 1.0), rel=1e-14)

    def test_strictly_decreasing(self) -> None:
        values = psi(np.geomspace(1e-6, 1e6, 200))
        assert np.all(np.diff(values) < 0.0)

    @pytest.mark.parametrize("x", [1e3, 1e8, 1e200], ids=["1e3", "1e8", "1e200"])
    def test_large_argument_asymptote(self, x: float) -> None:
        """ψ(x) · 2x -> 1."""
        assert psi(x) * 2.0 * x == pytest.approx(1.0, rel=1e-3)

    @pytest.mark.parametrize("x", [10.0, 1e2, 1e4, 1e6], ids=lambda x: f"x={x:g}")
    def test_large_argument_error_bound(self, x: float) -> None:
        """ψ(x) · 2x = 1 - 1/(2x) + O(x^-2)."""
        gap = 1.0 - psi(x) * 2.0 * x
        assert 0.9 / (2.0 * x) <= gap <= 1.0 / (2.0 * x)

    def test_array_in_array_out(self) -> None:
        out = psi(np.array([0.0, 1.0]))
        assert isinstance(out, np.ndarray)
        assert out.shape == (2,)

    def test_negative_argument_rejected(self) -> None:
        with pytest.raises(InvalidInputError):
            psi(-0.1)

    @pytest.mark.parametrize("u", [1e-4, 0.1, 1.0, 1.9], ids=lambda u: f"u={u}")
    def test_inverse(self, u: float) -> None:
        assert psi(psi_inverse(u)) == pytest.approx(u, rel=1e-10)

    def test_inverse_dense(self) -> None:
        us = np.linspace(0.01, 1.99, 2001)
        np.testing.assert_allclose(psi(psi_inverse(us)), us, rtol=0.0, atol=1e-12)

    def test_inverse_domain(self) -> None:
        with pytest.raises(InvalidInputError):
            psi_inverse(2.5)


class TestImpliedSlopeFromPrice:
    @pytest.mark.parametrize("k, v", [(4.0, 0.5), (1.0, 0.2), (20.0, 1.5)], ids=["k4", "k1", "k20"])
    def test_exact_with_residual(self, k: float, v: float) -> None:
        """ψ((-log c + ε1)/k) recovers V²/k exactly for Black-Scholes prices."""
        price = bs_price(k, v)
        eps1 = epsilon1_residual(k, v, price)
        assert implied_slope_from_price(price.log_otm, k, eps1) == pytest.approx(v * v / k, rel=1e-10)

    def test_zero_strike_rejected(self) -> None:
        with pytest.raises(InvalidInputError):
            implied_slope_from_price(-1.0, 0.0)


class TestShifts:
    def test_shift_table(self) -> None:
        assert PSI_SHIFT[("right", "price")] == 0.0
        assert PSI_SHIFT[("right", "cdf_tail")] == -1.0
        assert PSI_SHIFT[("right", "density")] == -1.0
        assert PSI_SHIFT[("left", "price")] == -1.0
        assert PSI_SHIFT[("left", "cdf_tail")] == 0.0
        assert PSI_SHIFT[("left", "density")] == 0.0

    def test_right_cdf_argument(self) -> None:
        tail = _linear_tail("right", "cdf_tail", 2.5)
        assert psi_argument(tail, [3.0])[0] == pytest.approx(1.5, rel=1e-14)

    def test_left_cdf_argument(self) -> None:
        tail = _linear_tail("left", "cdf_tail", 1.5)
        assert psi_argument(tail, [3.0])[0] == pytest.approx(1.5, rel=1e-14)

    def test_argument_needs_positive_distance(self) -> None:
        with pytest.raises(InvalidInputError):
            psi_argument(_linear_tail("right", "density", 2.0), [0.0])


class TestWings:
    def test_right_wing_exponential_tail(self) -> None:
        wing = right_wing(_linear_tail("right", "cdf_tail", 2.5), GOOD, grid=[5.0, 10.0])
        assert wing.variant == "iv_prime"
        assert wing.slope_fn(np.array([10.0]))[0] == pytest.approx(psi(1.5), rel=1e-14)
        assert wing.theta_limit == pytest.approx(1.5, rel=1e-12)

    def test_left_wing_density_variant(self) -> None:
        wing = left_wing(_linear_tail("left", "density", 1.5), GOOD)
        assert wing.variant == "iv_doubleprime"
        assert wing.slope_fn(np.array([4.0]))[0] == pytest.approx(psi(1.5), rel=1e-14)

    def test_left_wing_gate(self) -> None:
        """A power-law left tail has q_minus = 0: (IL) fails."""
        cond = MomentCondition(p_plus=math.inf, q_minus=0.0)
        with pytest.raises(ConditionGateError) as exc_info:
            left_wing(_linear_tail("left", "cdf_tail", 1.0), cond)
        assert exc_info.value.side == "left"
        assert exc_info.value.margin == 0.0

    def test_right_wing_gate(self) -> None:
        cond = MomentCondition(p_plus=1.0, q_minus=1.0)
        with pytest.raises(ConditionGateError):
            right_wing(_linear_tail("right", "cdf_tail", 1.0), cond)

    def test_side_mismatch(self) -> None:
        with pytest.raises(InvalidInputError):
            right_wing(_linear_tail("left", "cdf_tail", 2.0), GOOD)

    def test_negative_argument_is_clamped(self) -> None:
        """A tail decaying slower than e^{-k} pins the slope just below ψ(0) = 2."""
        wing = right_wing(_linear_tail("right", "density", 0.5), GOOD)
        assert wing.clamped(np.array([2.0]))[0]
        slope = wing.slope_fn(np.array([2.0]))[0]
        assert slope < 2.0
        assert slope == SLOPE_CAP == pytest.approx(2.0, rel=1e-15)

    def test_sublinear_black_scholes(self, bs_model) -> None:
        """k · ψ-slope recovers σ²T from the Gaussian density at k = 5."""
        tail = known_tail_asymptote(bs_model, "right")
        wing = sublinear_wing(tail, MomentCondition(p_plus=math.inf, q_minus=math.inf))
        assert wing.variant == "v"
        assert 5.0 * wing.slope_fn(np.array([5.0]))[0] == pytest.approx(0.04, rel=0.03)

    def test_estimate_theta_extrapolates(self) -> None:
        tail = TailFunction(side="right", kind="price", evaluator=lambda k: -2.0 * k + 3.0)
        raw, extrapolated = estimate_theta(tail, [10.0, 20.0])
        assert raw == pytest.approx(2.0 - 3.0 / 20.0, rel=1e-14)
        assert extrapolated == pytest.approx(2.0, rel=1e-12)


class TestConditions:
    def test_check_condition_margins(self) -> None:
        assert check_condition(GOOD, "right") == (True, pytest.approx(1.5))
        assert check_condition(GOOD, "left") == (True, pytest.approx(1.5))

    def test_lee_slope(self) -> None:
        assert lee_slope(GOOD, "right") == pytest.approx(psi(1.5), rel=1e-14)
        assert lee_slope(GOOD, "left") == pytest.approx(psi(1.5), rel=1e-14)

    def test_lee_slope_all_moments(self) -> None:
        assert lee_slope(MomentCondition(p_plus=math.inf, q_minus=math.inf), "right") == 0.0


class TestTailChain:
    """Density, tail probability and call price of the NIG twin share one exponential rate."""

    # 10 to 200
    GRID = geometric_grid(10.0, 20.0 ** (1.0 / 15.0), 16)

    @pytest.mark.parametrize("kind", ["density", "cdf_tail", "price"])
    def test_common_index_one(self, nig_twin_model, kind: str) -> None:
        tail = tail_function(nig_twin_model, "right", kind)
        est = estimate_index(lambda k: -tail(k), self.GRID)
        assert est.alpha_hat == pytest.approx(1.0, abs=0.05)

    def test_call_price_tracks_tail_probability(self, nig_twin_model) -> None:
        """log c(k) ~ k + log F̄(k)."""
        k = 200.0
        log_c = price_otm(nig_twin_model, k).price.log_otm
        assert log_c / (k + tail_cdf(nig_twin_model, k)) == pytest.approx(1.0, rel=0.02)

    def test_price_and_density_arguments_meet(self, nig_twin_model) -> None:
        k = 200.0
        by_price = float(psi_argument(tail_function(nig_twin_model, "right", "price"), k))
        by_density = float(psi_argument(tail_function(nig_twin_model, "right", "density"), k))
        assert by_density == pytest.approx(1.5, abs=0.05)
        assert abs(by_price - by_density) < 0.02
