import numpy as np
import pytest

from switchlin.ballbeam import benchmark_plant, symbolic_system


@pytest.fixture(scope="session")
def plant():
    return benchmark_plant()


@pytest.fixture(scope="session")
def params(plant):
    return plant.symbol_values()


@pytest.fixture(scope="session")
def bb(plant):
    return symbolic_system(plant)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
