import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from harness import SimConfig, generate_dataset

settings.register_profile(
    "flmtest",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("flmtest")


@pytest.fixture
def rng():
    return np.random.default_rng(20190101)


@pytest.fixture(scope="session")
def gaussian_null_data():
    config = SimConfig(family="gaussian", coefficient="scalar", delta=0.0, n=60)
    return generate_dataset(config, seed=11)


@pytest.fixture(scope="session")
def gaussian_signal_data():
    config = SimConfig(family="gaussian", coefficient="scalar", delta=3.0, n=80)
    return generate_dataset(config, seed=12)


@pytest.fixture(scope="session")
def bernoulli_data():
    config = SimConfig(family="bernoulli", coefficient="linear", delta=1.0, n=80)
    return generate_dataset(config, seed=13)


@pytest.fixture(scope="session")
def sparse_data():
    config = SimConfig(family="gaussian", n=80, m_i=20)
    return generate_dataset(config, seed=14)
