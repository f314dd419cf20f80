import time

import numpy as np
import pytest

import shadowkink as sk

A_HALF = np.sqrt(2.0) / 2.0          # a_*/2 for the rational gradient pair
EPS_LADDER = (0.02, 0.01, 0.005, 0.0025)


@pytest.fixture(scope="session")
def spec_i():
    return sk.PotentialSpec.builtin("rational-grad")


@pytest.fixture(scope="session")
def spec_ii():
    return sk.PotentialSpec.builtin("rational-gauss")


@pytest.fixture(scope="session")
def spec_gauss():
    return sk.PotentialSpec.builtin("gauss-grad")


@pytest.fixture(scope="session")
def thresholds_i(spec_i):
    return spec_i.thresholds()


@pytest.fixture(scope="session")
def thresholds_ii(spec_ii):
    return spec_ii.thresholds()


@pytest.fixture(scope="session")
def ladder_i(spec_i):
    """Minimizers for the scaling study; build time kept for the runtime gate."""
    t0 = time.perf_counter()
    sols = {eps: sk.solve_minimizer(spec_i, eps, A_HALF) for eps in EPS_LADDER}
    return {"solutions": sols, "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="session")
def etas_i(spec_i, ladder_i):
    sols = ladder_i["solutions"]
    return {
        eps: sk.solve_eta(spec_i, eps, A_HALF, match=sols[eps])
        for eps in (0.01, 0.005, 0.0025)
    }


@pytest.fixture(scope="session")
def pii_minus_q():
    return sk.solve_pii(-0.25, "minus")


@pytest.fixture(scope="session")
def pii_plus_q():
    return sk.solve_pii(-0.25, "plus")


@pytest.fixture(scope="session")
def pii_hm():
    return sk.solve_pii(0.0, "plus")
