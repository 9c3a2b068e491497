"""Exception hierarchy shared by the services and the CLI."""

from typing import Any, Dict, Optional


class SmileAtlasError(Exception):
    """Base class for every error raised on purpose by smile_atlas."""

    exit_code = 4

    def to_dict(self) -> Dict[str, Any]:
        """Structured reason used in reports and on the CLI's stderr."""
        return {"error": type(self).__name__, "detail": str(self)}


class InvalidInputError(SmileAtlasError, ValueError):
    """Raised when an argument is non-finite or outside its admissible range."""

    exit_code = 2


class ConfigError(SmileAtlasError):
    """Raised when a run config or CLI invocation is unusable."""

    exit_code = 2


class UnsupportedError(ConfigError):
    """Raised when an operation is not available for a model or side."""


class ConditionGateError(SmileAtlasError):
    """Raised when (IR) or (IL) fails, so the wing formula is not licensed."""

    exit_code = 3

    def __init__(self, side: str, margin: float, reason: str) -> None:
        super().__init__(reason)
        self.side = side
        self.margin = margin
        self.reason = reason

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload.update({"side": self.side, "margin": self.margin})
        return payload


class NumericalError(SmileAtlasError):
    """Raised when a numerical routine cannot deliver a trustworthy value."""

    exit_code = 4


class PriceBoundsError(NumericalError):
    """Raised when a price lies outside the no-arbitrage band (intrinsic, bound)."""


class BracketError(NumericalError):
    """Raised when a root-finder cannot bracket its root."""


class QuadratureError(NumericalError):
    """Raised when adaptive quadrature exhausts its refinement budget."""


class DomainError(NumericalError):
    """Raised when a transform is evaluated outside its domain."""

    def __init__(self, message: str, boundary: Optional[float] = None) -> None:
        super().__init__(message)
        self.boundary = boundary

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["boundary"] = self.boundary
        return payload
