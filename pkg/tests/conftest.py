import numpy as np
import pytest

from fracwave.numerics.mesh_fem import SpatialMesh, TemporalGrid
from fracwave.numerics.scheme import assemble_system, example_problem


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grids():
    return TemporalGrid(J=100), SpatialMesh(N=15)


@pytest.fixture
def example1_system(small_grids):
    tg, sm = small_grids
    return assemble_system(example_problem(1, 1.5), tg, sm)
