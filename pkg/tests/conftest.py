import numpy as np
import pytest

from compspread.coefficients import constant_set
from compspread.dispersal import Grid


@pytest.fixture(scope="session")
def canonical_set():
    """Constant coefficients (1, 1, 0.5, 0.4, 0.5, 1): the u-species
    excludes the v-species and all envelope hypotheses hold."""
    return constant_set(1.0, 1.0, 0.5, 0.4, 0.5, 1.0)


@pytest.fixture(scope="session")
def weak_set():
    """Symmetric weak competition (1, 1, 0.5, 1, 0.5, 1): interior
    equilibrium at (2/3, 2/3)."""
    return constant_set(1.0, 1.0, 0.5, 1.0, 0.5, 1.0)


@pytest.fixture
def small_grid():
    return Grid(-10.0, 10.0, 201)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
