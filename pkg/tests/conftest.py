import numpy as np
import pytest

from config import CONFIG
from hamiltonians import HamiltonianModel
from linalg_core import SIGMA_Z
from spectral import TimeGrid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_hermitian(rng):
    def make(dim=2, scale=1.0):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return scale * 0.5 * (a + a.conj().T)
    return make


@pytest.fixture
def reference():
    """Reference parameters (rad/us, us)."""
    return {"omega0": CONFIG.REFERENCE_OMEGA0, "omegaT": CONFIG.REFERENCE_OMEGA_T, "tau": CONFIG.REFERENCE_TAU}


@pytest.fixture
def unit_grid():
    return TimeGrid(0.0, 1.0, 201)


@pytest.fixture
def crossing_model():
    """H(t) = t sz: the two levels touch at t = 0."""
    return HamiltonianModel(
        name="crossing",
        dim=2,
        params={},
        evaluate=lambda t: t * SIGMA_Z,
        evaluate_dot=lambda t: np.array(SIGMA_Z),
        evaluate_ddot=lambda t: np.zeros((2, 2), dtype=np.complex128),
        max_frequency=0.0,
    )

