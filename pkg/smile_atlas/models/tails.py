"""Pydantic models for one-sided log-tails, moment conditions and wing asymptotes."""

from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from smile_atlas.utils.errors import InvalidInputError

Side = Literal["right", "left"]
TailKind = Literal["density", "cdf_tail", "price"]
Variant = Literal["iv", "iv_prime", "iv_doubleprime", "v"]

# Formula variant licensed by each kind of tail.
VARIANT_FOR_KIND = {"price": "iv", "cdf_tail": "iv_prime", "density": "iv_doubleprime"}
KIND_FOR_VARIANT = {variant: kind for kind, variant in VARIANT_FOR_KIND.items()}


class TailFunction(BaseModel):
    """
    A one-sided log-scale tail k -> log g(k) for k >= k_min.

    side=right: g is f(k), F̄(k) or c(k); side=left: g is f(-k), F(-k) or
    p(-k). The argument k is always the positive distance into the wing.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    side: Side
    kind: TailKind
    evaluator: Callable[[np.ndarray], np.ndarray]
    k_min: float = 0.0
    label: str = ""

    def __call__(self, k) -> np.ndarray:
        ks = np.asarray(k, dtype=float)
        if np.any(ks < self.k_min):
            raise InvalidInputError(
                f"tail '{self.label}' evaluated below its domain k_min={self.k_min}"
            )
        return np.asarray(self.evaluator(ks), dtype=float)


class MomentCondition(BaseModel):
    """Critical exponential moments of X; +inf means all moments exist."""

    model_config = ConfigDict(frozen=True)

    p_plus: float = Field(ge=0.0)
    q_minus: float = Field(ge=0.0)

    @property
    def ir_holds(self) -> bool:
        return self.p_plus > 1.0

    @property
    def il_holds(self) -> bool:
        return self.q_minus > 0.0

    @property
    def risk_neutral(self) -> bool:
        """E[e^X] can only be finite when p_plus >= 1."""
        return self.p_plus >= 1.0


class WingAsymptote(BaseModel):
    """Predicted wing slope k -> V^2/|k| built from a tail function."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    side: Side
    variant: Variant
    kind: TailKind
    shift: float
    argument_fn: Callable[[np.ndarray], np.ndarray]
    slope_fn: Callable[[np.ndarray], np.ndarray]
    theta_raw: Optional[float] = None
    theta_limit: Optional[float] = None
    label: str = ""

    def clamped(self, k) -> np.ndarray:
        """Mask of strikes where the raw ψ argument is negative (pre-asymptotic)."""
        return np.asarray(self.argument_fn(np.asarray(k, dtype=float))) < 0.0

