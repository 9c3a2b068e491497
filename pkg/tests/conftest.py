"""Shared model fixtures for the smile_atlas test suite."""

import pytest

from smile_atlas.models.model_spec import (
    BlackScholesSpec,
    FMLSSpec,
    MertonSpec,
    NIGSpec,
    SyntheticTailSpec,
    TailSideSpec,
)
from smile_atlas.services.model_zoo import nig_twin


@pytest.fixture
def bs_model() -> BlackScholesSpec:
    return BlackScholesSpec(sigma=0.2, T=1.0)


@pytest.fixture
def merton_model() -> MertonSpec:
    return MertonSpec(sigma=0.2, lam=0.3, alpha_j=0.2, delta_j=0.15)


@pytest.fixture
def merton_fixed_jumps() -> MertonSpec:
    """Deterministic upward jumps (delta_j = 0)."""
    return MertonSpec(sigma=0.2, lam=0.3, alpha_j=0.2, delta_j=0.0)


@pytest.fixture
def merton_lattice() -> MertonSpec:
    """No diffusion, fixed jumps: X lives on drift + 0.2 N."""
    return MertonSpec(sigma=0.0, lam=0.3, alpha_j=0.2, delta_j=0.0)


@pytest.fixture
def nig_model() -> NIGSpec:
    return NIGSpec(alpha=2.0, beta=-0.5, delta=1.0)


@pytest.fixture
def fmls_model() -> FMLSSpec:
    return FMLSSpec(alpha=1.5, sigma=0.2)


@pytest.fixture
def nig_twin_model(nig_model: NIGSpec) -> SyntheticTailSpec:
    return nig_twin(nig_model)


@pytest.fixture
def symmetric_synthetic() -> SyntheticTailSpec:
    """Law symmetric about the origin: identical sides, no drift."""
    side = TailSideSpec(log_c=-1.0, power=-1.5, linear=-2.0)
    return SyntheticTailSpec(right=side, left=side, martingale=False, mu=0.0)


@pytest.fixture
def exponential_synthetic() -> SyntheticTailSpec:
    """Pure exponential right tail e^{-3y}: F̄ and c are exactly exponential beyond the bridge."""
    return SyntheticTailSpec(
        right=TailSideSpec(log_c=0.0, power=0.0, linear=-3.0),
        left=TailSideSpec(log_c=0.0, power=0.0, linear=-2.0),
    )
