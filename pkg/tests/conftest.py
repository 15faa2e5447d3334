import numpy as np
import pytest

from sdlab import Grid1D, build_spectrum


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid64():
    return Grid1D(64, 1.0)


@pytest.fixture
def grid32():
    return Grid1D(32, 1.0)


@pytest.fixture
def grid16():
    return Grid1D(16, 1.0)


@pytest.fixture
def spec64(grid64):
    return build_spectrum(grid64, 1.0, 0.1, 32)


@pytest.fixture
def spec32(grid32):
    return build_spectrum(grid32, 1.0, 0.1, 16)
