import numpy as np
import pytest

from travwave import make_context, paper_params
from travwave.solve import find_c_star, find_mu_b, find_mu_f, find_mu_pul


@pytest.fixture(scope="session")
def mp():
    return paper_params()


@pytest.fixture(scope="session")
def cycle125(mp):
    """Heteroclinic-cycle solve at K=1.25, shared by many tests."""
    return find_c_star(mp, 1.25)


@pytest.fixture(scope="session")
def ctx_d11(mp, cycle125):
    """A context above the cycle speed (pulse-to-u1 territory)."""
    return make_context(mp, 1.25, 0.0163, c_star=cycle125.c_star)


@pytest.fixture(scope="session")
def ctx_d12(mp, cycle125):
    """A context below the cycle speed (pulse-to-u2 territory)."""
    return make_context(mp, 1.25, 0.0155, c_star=cycle125.c_star)


@pytest.fixture(scope="session")
def het_pair_d11(ctx_d11):
    return find_mu_b(ctx_d11), find_mu_f(ctx_d11)


@pytest.fixture(scope="session")
def pulse1_d11(ctx_d11):
    return find_mu_pul(ctx_d11, 1)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240831)
