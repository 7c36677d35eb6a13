import numpy as np
import pytest

from weylsim.fockspace import SingleModeSpec, SpaceSpec


@pytest.fixture(scope="session")
def space():
    return SpaceSpec(15, 15)


@pytest.fixture(scope="session")
def small_space():
    return SpaceSpec(8, 8)


@pytest.fixture(scope="session")
def sm_space():
    return SingleModeSpec(31)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
