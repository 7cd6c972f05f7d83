import numpy as np
import pytest

from painleve_instanton.instanton import BvpConfig, asd_closed_profile, solve_bvp
from painleve_instanton.isomonodromy import default_verification_ts, make_family


@pytest.fixture(scope="session")
def ts_default():
    return default_verification_ts()


@pytest.fixture(scope="session")
def prof1():
    return asd_closed_profile(1)


@pytest.fixture(scope="session")
def prof3():
    return asd_closed_profile(3)


@pytest.fixture(scope="session")
def prof5():
    return solve_bvp(BvpConfig(n=5))


@pytest.fixture(scope="session")
def fam1_raw(prof1, ts_default):
    return make_family(prof1, ts_default, gauge="line")


@pytest.fixture(scope="session")
def fam3_raw(prof3, ts_default):
    return make_family(prof3, ts_default, gauge="line")


@pytest.fixture(scope="session")
def fam1_gauged(prof1, ts_default):
    return make_family(prof1, ts_default, gauge="schlesinger")


@pytest.fixture(scope="session")
def fam3_gauged(prof3, ts_default):
    return make_family(prof3, ts_default, gauge="schlesinger")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
