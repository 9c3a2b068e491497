"""Tests for the contour and Gil-Pelaez transform inversions."""

import pytest
from scipy.special import log_ndtr, ndtr

from smile_atlas.services.blackscholes import log_otm_price
from smile_atlas.services.fourier import gil_pelaez_cdf, log_price_contour, log_tail_contour
from smile_atlas.services.model_zoo import complex_log_mgf
from smile_atlas.utils.errors import QuadratureError


@pytest.fixture
def bs_log_mgf(bs_model):
    return complex_log_mgf(bs_model)


class TestTailContour:
    def test_right_tail_at_saddle(self, bs_log_mgf) -> None:
        # K'(c) = 1 at c = 1.02/0.04
        res = log_tail_contour(bs_log_mgf, 1.0, 25.5)
        assert res.log_value == pytest.approx(float(log_ndtr(-1.02 / 0.2)), rel=1e-9)

    def test_left_tail(self, bs_log_mgf) -> None:
        res = log_tail_contour(bs_log_mgf, -1.0, -24.5)
        assert res.log_value == pytest.approx(float(log_ndtr(-0.98 / 0.2)), rel=1e-9)

    def test_deep_tail_below_double_range(self, bs_log_mgf) -> None:
        x = 12.0
        res = log_tail_contour(bs_log_mgf, x, (x + 0.02) / 0.04)
        assert res.log_value < -1000.0
        assert res.log_value == pytest.approx(float(log_ndtr(-(x + 0.02) / 0.2)), rel=1e-9)

    def test_pole_rejected(self, bs_log_mgf) -> None:
        with pytest.raises(QuadratureError):
            log_tail_contour(bs_log_mgf, 1.0, 0.0)


class TestPriceContour:
    def test_call(self, bs_log_mgf) -> None:
        res = log_price_contour(bs_log_mgf, 1.0, 26.5)
        assert res.log_value == pytest.approx(log_otm_price(1.0, 0.2), rel=1e-9)

    def test_put(self, bs_log_mgf) -> None:
        res = log_price_contour(bs_log_mgf, -1.0, -24.5)
        assert res.log_value == pytest.approx(log_otm_price(-1.0, 0.2), rel=1e-9)

    def test_strip_between_poles_rejected(self, bs_log_mgf) -> None:
        with pytest.raises(QuadratureError):
            log_price_contour(bs_log_mgf, 0.0, 0.5)


class TestGilPelaez:
    @pytest.mark.parametrize("x", [-0.3, 0.0, 0.25], ids=lambda x: f"x={x}")
    def test_gaussian_cdf(self, bs_log_mgf, x: float) -> None:
        prob, _ = gil_pelaez_cdf(bs_log_mgf, x)
        assert prob == pytest.approx(float(ndtr((x + 0.02) / 0.2)), abs=1e-9)
