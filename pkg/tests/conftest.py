import math

import pytest

from isoagg.spectral import SpectralModel
from isoagg.theta_law import make_theta_law


def model(alpha, support="positive", sigma2=1.0):
    return SpectralModel(make_theta_law(alpha, None, support), sigma2)


@pytest.fixture(scope="session")
def m_half():
    return model(0.5)


@pytest.fixture(scope="session")
def m_one():
    return model(1.0)


@pytest.fixture(scope="session")
def m_two():
    return model(2.0)


@pytest.fixture(scope="session")
def m_half_mirrored():
    return model(0.5, "mirrored")


PI = math.pi
