"""Tests for the log-domain Gauss-Kronrod integrator."""

import math

import numpy as np
import pytest
from scipy.special import log_ndtr

from smile_atlas.services.quadrature import decay_length, log_integrate
from smile_atlas.utils.errors import QuadratureError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _log_gauss(x: np.ndarray) -> np.ndarray:
    return -0.5 * x * x - LOG_SQRT_2PI


class TestLogIntegrate:
    def test_gaussian_over_real_line(self) -> None:
        res = log_integrate(_log_gauss, -math.inf, math.inf)
        assert res.log_value == pytest.approx(0.0, abs=1e-10)

    def test_deep_gaussian_tail(self) -> None:
        """Φ(-40) ≈ e^-804 is far below the smallest double."""
        res = log_integrate(_log_gauss, 40.0, scale=decay_length(_log_gauss, 40.0))
        assert res.log_value == pytest.approx(float(log_ndtr(-40.0)), rel=1e-10)

    def test_finite_range(self) -> None:
        res = log_integrate(lambda x: -x, 0.0, 1.0)
        assert res.log_value == pytest.approx(math.log(-math.expm1(-1.0)), rel=1e-12)

    def test_left_half_line(self) -> None:
        res = log_integrate(lambda x: x, -math.inf, 2.0)
        assert res.log_value == pytest.approx(2.0, abs=1e-10)

    def test_error_estimate_reported(self) -> None:
        res = log_integrate(_log_gauss, 0.0)
        assert 0.0 <= res.rel_error <= 1e-10
        assert res.n_panels >= 1

    def test_non_decaying_integrand(self) -> None:
        with pytest.raises(QuadratureError):
            log_integrate(lambda x: np.zeros_like(x), 0.0)

    def test_empty_range(self) -> None:
        with pytest.raises(QuadratureError):
            log_integrate(_log_gauss, 1.0, 1.0)

    def test_vanishing_integrand(self) -> None:
        res = log_integrate(lambda x: np.full_like(x, -math.inf), 0.0, 1.0)
        assert res.log_value == -math.inf


class TestDecayLength:
    def test_exponential(self) -> None:
        assert decay_length(lambda x: -3.0 * x, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-6)

    def test_increasing_falls_back_to_ceiling(self) -> None:
        assert decay_length(lambda x: x, 5.0) == 5.0
        assert decay_length(lambda x: x, 5.0, ceiling=0.5) == 0.5
