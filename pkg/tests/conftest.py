import pytest

from windforecast.dataset import SyntheticConfig, generate_synthetic


@pytest.fixture(scope="session")
def synthetic_5k():
    """Default-config synthetic series, sized for correlation-structure tests."""
    return generate_synthetic(SyntheticConfig(n_samples=5000, seed=42))


@pytest.fixture(scope="session")
def noise_free_2k():
    return generate_synthetic(SyntheticConfig(n_samples=2000, noise_sd=0.0, seed=7))
