import numpy as np
import pytest

from bagcv.data import Sample


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: long-running desk-scale or large-n test"
    )


@pytest.fixture
def normal_sample_200():
    rng = np.random.default_rng(42)
    return Sample.from_values(rng.normal(size=200))


@pytest.fixture
def normal_sample_500():
    rng = np.random.default_rng(7)
    return Sample.from_values(rng.normal(size=500))
