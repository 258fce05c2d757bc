import numpy as np
import pytest

from cohstate.liealg import build_spin_rep, exactness_orders, haar_quadrature


@pytest.fixture(scope="session")
def rep_half():
    return build_spin_rep(0.5)


@pytest.fixture(scope="session")
def rep_one():
    return build_spin_rep(1.0)


@pytest.fixture(scope="session")
def quad_half(rep_half):
    return haar_quadrature(rep_half, *exactness_orders(0.5))


@pytest.fixture(scope="session")
def quad_one(rep_one):
    return haar_quadrature(rep_one, *exactness_orders(1.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260813)


def random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
