import numpy as np
import pytest
from hypothesis import settings

from pmelab import ManifoldProfile

settings.register_profile("pmelab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("pmelab")


@pytest.fixture(scope="session")
def e3():
    return ManifoldProfile.euclidean(3)


@pytest.fixture(scope="session")
def h3():
    return ManifoldProfile.hyperbolic(3)


@pytest.fixture(scope="session")
def e2():
    return ManifoldProfile.euclidean(2)


@pytest.fixture(scope="session")
def sinh_table():
    r = np.linspace(0.0, 6.0, 400)
    return r, np.sinh(r)
