import numpy as np
import pytest

from rrtperc.rng import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


def pytest_configure(config):
    np.set_printoptions(linewidth=120)
