"""Numerical tolerances and limits, overridable through SMILE_ATLAS_* variables."""

import os


class Settings:
    """
    Process-wide numerical knobs shared by every run.

    Each attribute is read once from its SMILE_ATLAS_* variable at import;
    per-run choices such as the model and grid live in RunConfig instead.
    """

    def __init__(self) -> None:
        self.LOG_LEVEL = os.environ.get("SMILE_ATLAS_LOG_LEVEL", "INFO").upper()
        # Thread pool size used when pricing the strikes of one smile curve.
        self.WORKERS = int(os.environ.get("SMILE_ATLAS_WORKERS", "4"))
        # Relative tolerance of the log-domain Gauss-Kronrod panels.
        self.QUAD_REL_TOL = float(os.environ.get("SMILE_ATLAS_QUAD_REL_TOL", "1e-10"))
        # Integrand mass this many nats below the running maximum is dropped.
        self.TRUNCATION_NATS = float(os.environ.get("SMILE_ATLAS_TRUNCATION_NATS", "45"))
        # Implied vols are only inverted above this log-price.
        self.REACH_LOG_PRICE = float(os.environ.get("SMILE_ATLAS_REACH_LOG_PRICE", "-700"))
        # Regular-variation verdict: residual <= REGVAR_TOL * log(lambda).
        self.REGVAR_TOL = float(os.environ.get("SMILE_ATLAS_REGVAR_TOL", "0.1"))
        # Subinterval budget handed to scipy's quad for Fourier integrals.
        self.FOURIER_LIMIT = int(os.environ.get("SMILE_ATLAS_FOURIER_LIMIT", "2000"))


settings = Settings()

__all__ = ["settings"]
