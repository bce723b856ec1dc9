import numpy as np
import pytest

from threewave.params import Params
from threewave.quadrature import QuadratureSpec


@pytest.fixture(scope="session")
def p():
    return Params()


@pytest.fixture(scope="session")
def q():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def constants(p):
    """Measured contraction constants on the default grid (shared, ~2 min)."""
    from threewave.verification import estimate_contraction_constants

    return estimate_contraction_constants(p)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
