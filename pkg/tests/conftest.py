import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qgres import fixtures

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def double_edge():
    return fixtures.double_edge_two_leads()


@pytest.fixture
def five_edge():
    return fixtures.five_edge_two_leads()


@pytest.fixture
def rng():
    return np.random.default_rng(461)
