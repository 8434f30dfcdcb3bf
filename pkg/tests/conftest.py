import math

import numpy as np
import pytest

from biloc.states import make_schmidt_state, make_werner

SQRT2 = math.sqrt(2.0)


@pytest.fixture
def phi_plus():
    return make_schmidt_state(SQRT2 / 2, SQRT2 / 2)


@pytest.fixture
def maximally_mixed():
    return make_werner(0.0)


@pytest.fixture
def product00():
    return make_schmidt_state(1.0, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
