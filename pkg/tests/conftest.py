import pytest

from lienard_lab.poly import Polynomial


@pytest.fixture(scope="session")
def vdp_F():
    # x^3/3 - x: classical van der Pol nonlinearity, one stable cycle.
    return Polynomial([0.0, -1.0, 0.0, 1.0 / 3.0])


@pytest.fixture(scope="session")
def quintic_F():
    # 0.32 x^5 - (4/3) x^3 + 0.8 x: two limit cycles.
    return Polynomial([0.0, 0.8, 0.0, -4.0 / 3.0, 0.0, 0.32])


@pytest.fixture(scope="session")
def cubic_no_cycles_F():
    # x + x^3: coefficients of x and x^3 share a sign, no closed orbits.
    return Polynomial([0.0, 1.0, 0.0, 1.0])


@pytest.fixture(scope="session")
def zero_F():
    return Polynomial([0.0])
