"""Pydantic helpers for normalized option prices carried in log scale."""

import math
from typing import Literal

import numpy as np

from pydantic import BaseModel, ConfigDict, field_validator

from smile_atlas.utils.errors import PriceBoundsError

OptionSide = Literal["call", "put"]


def _log_sub(log_a: float, b: float) -> float:
    """log(exp(log_a) - b) for b >= 0, or -inf when the difference is not positive."""
    if b <= 0.0:
        return log_a
    ratio = b * math.exp(-log_a) if log_a > -700.0 else math.inf
    if ratio >= 1.0:
        return -math.inf
    return log_a + math.log1p(-ratio)


class NormalizedPrice(BaseModel):
    """
    Undiscounted option price divided by the forward, as logs.

    `log_otm` is the log of the out-of-the-money value at the same strike
    (the call for k >= 0, the put for k < 0). Put-call parity c - p = 1 - e^k
    links it to `log_price`; inversion works on `log_otm` so no digits are
    lost to the intrinsic value.
    """

    model_config = ConfigDict(frozen=True)

    k: float
    side: OptionSide
    log_price: float
    log_otm: float

    @field_validator("k")
    @classmethod
    def _finite_strike(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("log-strike must be finite")
        return v

    @property
    def price(self) -> float:
        return math.exp(self.log_price)

    @classmethod
    def from_otm(cls, k: float, log_otm: float, side: OptionSide = "call") -> "NormalizedPrice":
        """Build from the out-of-the-money value, filling the requested side by parity."""
        if side == "call" and k < 0.0:
            log_price = float(np.logaddexp(math.log(-math.expm1(k)), log_otm))
        elif side == "put" and k > 0.0:
            log_price = float(np.logaddexp(math.log(math.expm1(k)), log_otm))
        else:
            log_price = log_otm
        return cls(k=k, side=side, log_price=log_price, log_otm=log_otm)

    @classmethod
    def from_log_price(cls, k: float, log_price: float, side: OptionSide = "call") -> "NormalizedPrice":
        """Build from a call or put log-price; the time value must be positive."""
        if not math.isfinite(log_price):
            raise PriceBoundsError(f"log-price must be finite, got {log_price}")
        if side == "call" and k < 0.0:
            log_otm = _log_sub(log_price, -math.expm1(k))
        elif side == "put" and k > 0.0:
            log_otm = _log_sub(log_price, math.expm1(k))
        else:
            log_otm = log_price
        if not math.isfinite(log_otm):
            raise PriceBoundsError(
                f"{side} price exp({log_price:.6g}) at k={k:.6g} is not above intrinsic value"
            )
        return cls(k=k, side=side, log_price=log_price, log_otm=log_otm)



class PricedStrike(BaseModel):
    """An out-of-the-money price with its estimated relative error and the route that produced it."""

    model_config = ConfigDict(frozen=True)

    price: NormalizedPrice
    quad_err: float = 0.0
    route: str
