import pytest

from chemflood.model import reference_model
from chemflood.characteristics import find_saddle
from chemflood.rarefaction import separatrices
from chemflood.riemann import RiemannSolver


@pytest.fixture(scope="session")
def model():
    return reference_model(n_grid=64)


@pytest.fixture(scope="session")
def saddle(model):
    return find_saddle(model)


@pytest.fixture(scope="session")
def seps(model, saddle):
    return separatrices(model, saddle)


@pytest.fixture(scope="session")
def solver(model):
    return RiemannSolver(model)
