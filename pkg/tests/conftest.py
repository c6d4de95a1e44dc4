import numpy as np
import pytest

from polarsim.core import DensityField, InitialCondition, make_grid_1d, project_initial


@pytest.fixture
def grid_fine():
    return make_grid_1d(30.0, 1200)


@pytest.fixture
def h1_field(grid_fine):
    ic = InitialCondition(kind="exponential", target_mass=1.0, alpha=1.0)
    return project_initial(ic, grid_fine)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


def random_field(grid, rng, scale=1.0):
    vals = rng.uniform(0.0, scale, size=grid.n_cells)
    return DensityField(grid, vals, 0.0)
