"""Shared test fixtures."""

import numpy as np
import pytest

from src.analysis.models import SpaceTimeField, WeightParams, geometric_times
from src.fields.grid import make_grid
from src.fields.models import ScalarField, VectorField
from src.fields.spectral import perp_gradient


@pytest.fixture
def grid2d():
    """Small planar grid: L = 8, N = 32, h = 0.5."""
    return make_grid(2, 8.0, 32)


@pytest.fixture
def grid3d():
    return make_grid(3, 8.0, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def weight_params():
    return WeightParams(gamma=0.5, tilde_gamma=0.5, alpha=0.25, beta=1.5, tilde_beta=1.5)


def random_field(grid, rng) -> VectorField:
    return VectorField(grid=grid, values=rng.normal(size=(grid.dimension,) + grid.shape))


def divergence_free_field(grid, rng) -> VectorField:
    psi = ScalarField(grid=grid, values=rng.normal(size=grid.shape))
    return perp_gradient(psi)


def power_law_solution(grid, times, beta: float) -> SpaceTimeField:
    """min(t^{-beta/2}, |x|^{-beta}) e_1 on every slice."""
    radius = np.broadcast_to(grid.radius(), grid.shape)
    values = np.zeros((len(times), grid.dimension) + grid.shape)
    for m, t in enumerate(times):
        values[m, 0] = np.minimum(t ** (-beta / 2.0), radius ** (-beta))
    return SpaceTimeField(grid=grid, times=times, values=values)


@pytest.fixture
def decay_solution():
    grid = make_grid(2, 32.0, 128)
    return power_law_solution(grid, geometric_times(1.0, 25.0, 12), 1.5)
