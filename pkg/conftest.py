import numpy as np
import pytest

from link.channel import sample_channel, triangular_pdp
from link.scenario import Scenario
from utils.numerics import SeededRng


@pytest.fixture
def rng():
    return SeededRng(1234)


@pytest.fixture
def pdp():
    return triangular_pdp()


@pytest.fixture
def small_channel(pdp, rng):
    """N=64, N_T=2, N_R=4 Rayleigh draw with the 64-tap profile."""
    return sample_channel(pdp, 64, 2, 4, rng.child("small"))


@pytest.fixture
def small_scenario():
    return Scenario(N=64, L_s=16, N_T=2, N_R=4, seed=7)


@pytest.fixture
def desk_scenario():
    """The N_T=10, N_R=30 point of the figures, N=256, L_s=64."""
    return Scenario(N=256, L_s=64, N_T=10, N_R=30, seed=20140101)


def relative(a, b):
    return np.abs(np.asarray(a) - np.asarray(b)) / np.abs(np.asarray(b))
