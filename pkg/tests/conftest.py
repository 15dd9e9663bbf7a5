import numpy as np
import pytest

from dvpcircle.circle import AngularGrid


@pytest.fixture(scope="session")
def grid2048():
    return AngularGrid(2048)


@pytest.fixture(scope="session")
def grid8192():
    return AngularGrid(8192)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
