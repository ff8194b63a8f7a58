import pytest

from hardedge import HardEdgeParams
from hardedge import hamiltonian_flow as flow
from hardedge import sigma_forms


@pytest.fixture(scope="session")
def params_m1():
    return HardEdgeParams.from_nu((0.0, 0.0))


@pytest.fixture(scope="session")
def params_m2():
    return HardEdgeParams.from_nu(sigma_forms.SPECIAL_NU)


@pytest.fixture(scope="session")
def traj_m1(params_m1):
    return flow.integrate(params_m1, 1e-5,
                          [1e-4, 1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
                          tol=1e-10)


@pytest.fixture(scope="session")
def traj_m2(params_m2):
    return flow.integrate(params_m2, 1e-5,
                          [1e-4, 1e-3, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0,
                           5.0, 10.0],
                          tol=1e-10)
