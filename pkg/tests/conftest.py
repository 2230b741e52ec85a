import numpy as np
import pytest

from attocell import NetworkGeometry, TABLE_DEFAULT_OPTICS


@pytest.fixture(scope="session")
def optics():
    return TABLE_DEFAULT_OPTICS


@pytest.fixture
def geometry():
    """Reference geometry: 0.5 m pitch, 1.5 m height (h/a = 3)."""
    return NetworkGeometry(pitch=0.5, height=1.5, trunc=200)


@pytest.fixture
def small_geometry():
    """Cheap lattice for Monte Carlo unit tests."""
    return NetworkGeometry(pitch=0.5, height=1.5, trunc=15)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(987654321)
