import pytest

from cognite.kinetics import KineticsClient
from cognite.kinetics.data_classes import KernelModel


@pytest.fixture(scope="session")
def client():
    return KineticsClient(max_workers=2, seed=0)


@pytest.fixture(scope="session")
def soft_model():
    return KernelModel(kind="soft", b_exponent=1.0, angular_exponent=0.0)


@pytest.fixture(scope="session")
def grid(client):
    return client.discretization.build_grid(p_max=6.0, n_per_axis=5)


@pytest.fixture(scope="session")
def matrices(client, soft_model, grid):
    return client.kernels.assemble_operator_matrices(soft_model, grid)


@pytest.fixture(scope="session")
def mu(client, grid):
    return client.moments.compute_mu_constants(grid)


@pytest.fixture(scope="session")
def profile(client, grid, mu):
    return client.modes.initial_profile(grid, mu, "generic")
