import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_simplex(rng, m, size=None):
    return rng.dirichlet(np.ones(m), size=size)
