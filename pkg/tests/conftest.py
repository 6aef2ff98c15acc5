import numpy as np
import pytest
from hypothesis import settings

from duhamelcheb import build_reference_example, heat_basis

settings.register_profile("suite", deadline=None, derandomize=True)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def basis64():
    return heat_basis(64)


@pytest.fixture(scope="session")
def reference_problem():
    return build_reference_example(M=128)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
