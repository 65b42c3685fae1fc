import numpy as np
import pytest

from ks1d import _kernels
from ks1d.entropy import EntropyProfile
from ks1d.model import GridSpec, Params, PowerLawDiffusion


@pytest.fixture(scope="session")
def grid64():
    return GridSpec(64)


@pytest.fixture(scope="session")
def grid256():
    return GridSpec(256)


@pytest.fixture(scope="session")
def alpha2_model():
    return PowerLawDiffusion(2.0)


# table construction is the expensive part; share one instance per session
@pytest.fixture(scope="session")
def alpha2_profile(alpha2_model):
    return EntropyProfile(alpha2_model)


@pytest.fixture(scope="session")
def alpha0_profile():
    return EntropyProfile(PowerLawDiffusion(0.0))


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    """Run the test once per available kernel backend."""
    previous = _kernels.get_backend()
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(previous)


def default_params(mass=1.0, chi=1.0, eps=1.0):
    return Params(chi=chi, eps=eps, mass=mass)


def uniform_state(grid, mass=1.0):
    u = np.full(grid.n_cells, mass)
    v = np.zeros(grid.n_cells)
    from ks1d.model import State
    return State(0.0, u, v)
