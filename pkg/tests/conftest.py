import numpy as np
import pytest

from hglk.grid import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid64():
    return Grid(64, 16.0)
