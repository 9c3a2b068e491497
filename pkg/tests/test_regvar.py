"""Tests for the regular-variation index estimator and the Bingham transform."""

import math

import numpy as np
import pytest
from scipy.special import erfcx

from smile_atlas.models.model_spec import FMLSSpec
from smile_atlas.services.model_zoo import known_tail_asymptote
from smile_atlas.services.pricing import tail_function
from smile_atlas.services.regvar import (
    MIN_GRID_POINTS,
    bingham_ratio,
    bingham_transform,
    estimate_index,
    geometric_grid,
)
from smile_atlas.utils.errors import InvalidInputError

# 10 · 2^17 ≈ 1.3e6
WIDE_GRID = geometric_grid(10.0, 2.0, 18)


class TestGeometricGrid:
    def test_values(self) -> None:
        np.testing.assert_allclose(geometric_grid(1.0, 2.0, 4), [1.0, 2.0, 4.0, 8.0])

    def test_rejects_bad_ratio(self) -> None:
        with pytest.raises(InvalidInputError):
            geometric_grid(1.0, 1.0, 4)


class TestEstimateIndex:
    def test_pure_power(self) -> None:
        est = estimate_index(lambda x: x**1.5, geometric_grid(1.0, 2.0, 20))
        assert est.alpha_hat == pytest.approx(1.5, abs=1e-12)
        assert est.residual == pytest.approx(0.0, abs=1e-10)
        assert est.verdict == "regularly_varying"
        assert est.lam == pytest.approx(2.0)

    @pytest.mark.parametrize("alpha", [1.2, 2.0, 3.0], ids=lambda a: f"alpha={a}")
    def test_log_factor_is_extrapolated_away(self, alpha: float) -> None:
        est = estimate_index(lambda x: x**alpha * np.log(x), WIDE_GRID)
        assert est.alpha_extrapolated == pytest.approx(alpha, abs=0.05)
        assert est.alpha_hat > alpha

    @pytest.mark.parametrize("alpha", [1.2, 2.0, 3.0], ids=lambda a: f"alpha={a}")
    def test_inverse_log_cube_is_extrapolated_away(self, alpha: float) -> None:
        est = estimate_index(lambda x: x**alpha / np.log(x) ** 3, WIDE_GRID)
        assert est.alpha_extrapolated == pytest.approx(alpha, abs=0.05)

    def test_residual_covers_the_whole_grid(self) -> None:
        """A kink below the top half shows in the residual but not in the verdict."""
        est = estimate_index(lambda x: x**2 + x**3 * (x < 50.0), geometric_grid(1.0, 2.0, 16))
        assert est.alpha_hat == pytest.approx(2.0, abs=1e-12)
        assert est.residual_top == pytest.approx(0.0, abs=1e-10)
        assert est.residual > 1.0
        assert est.verdict == "regularly_varying"

    def test_exponential_is_inconclusive(self) -> None:
        est = estimate_index(lambda x: x, geometric_grid(1.0, 2.0, 20), log_scale=True)
        assert est.verdict == "inconclusive"

    def test_grid_must_be_geometric(self) -> None:
        grid = np.linspace(1.0, 20.0, MIN_GRID_POINTS)
        with pytest.raises(InvalidInputError):
            estimate_index(lambda x: x, grid)

    def test_grid_too_short(self) -> None:
        with pytest.raises(InvalidInputError):
            estimate_index(lambda x: x, geometric_grid(1.0, 2.0, MIN_GRID_POINTS - 1))

    def test_ratio_mismatch(self) -> None:
        with pytest.raises(InvalidInputError):
            estimate_index(lambda x: x, geometric_grid(1.0, 2.0, 20), lam=3.0)


class TestInvertedTails:
    def test_fmls_tail_index_three(self) -> None:
        """-log F̄ ~ C (k + A)^3 for α = 1.5, with A = σ^α |sec(πα/2)|."""
        m = FMLSSpec(alpha=1.5, sigma=0.2)
        grid = geometric_grid(1.0, 6.0 ** (1.0 / 15.0), 16)
        tail = tail_function(m, "right", "cdf_tail")
        est = estimate_index(lambda k: -tail(k), grid)
        assert est.alpha_hat == pytest.approx(3.0, abs=0.15)

        ratios = tail(grid) / known_tail_asymptote(m, "right")(grid)
        gaps = np.abs(ratios - 1.0)
        assert np.all(np.diff(gaps) < 0.0)
        assert gaps[-1] < 0.1


class TestBingham:
    def test_gaussian_reference(self) -> None:
        """-log ∫_30^∞ e^{-y²} dy = 900 - log(√π/2 · erfcx(30)) ≈ 904.09."""
        expected = 900.0 - math.log(0.5 * math.sqrt(math.pi) * erfcx(30.0))
        assert bingham_transform(lambda y: y * y, 30.0) == pytest.approx(expected, rel=1e-9)
        assert expected == pytest.approx(904.09, abs=0.01)

    def test_linear_is_exact(self) -> None:
        assert bingham_transform(lambda y: y, 7.0) == pytest.approx(7.0, abs=1e-8)

    @pytest.mark.parametrize(
        "g, x",
        [
            (lambda y: y * y, 40.0),
            (lambda y: 3.0 * y**1.2, 130.0),
            (lambda y: y * y * np.log(y), 20.0),
        ],
        ids=["y^2", "3y^1.2", "y^2 log y"],
    )
    def test_ratio_close_to_one(self, g, x: float) -> None:
        assert float(g(np.array([x]))[0]) >= 1000.0
        ratio = bingham_ratio(g, x)
        assert 1.0 <= ratio <= 1.02

    def test_ratio_needs_positive_g(self) -> None:
        with pytest.raises(InvalidInputError):
            bingham_ratio(lambda y: -y, 2.0)
