import numpy as np
import pytest

import conefrac as cf
from conefrac.quadrature import DEFAULT_CONFIG


@pytest.fixture(scope="session")
def const2():
    return cf.ConstantDensity(2)


@pytest.fixture(scope="session")
def cone2():
    return cf.ConePlateauDensity(2, cf.Cone((1.0, 0.0), 0.3), 1.0, 0.25)


@pytest.fixture(scope="session")
def cfg():
    return DEFAULT_CONFIG


@pytest.fixture(scope="session")
def fast_cfg():
    # loose target for dual-route comparisons where both sides are numeric
    return DEFAULT_CONFIG.with_tol(1e-7, 1e-6)


@pytest.fixture()
def rng():
    return np.random.default_rng(20220822)
