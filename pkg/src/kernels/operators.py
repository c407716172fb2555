"""Heat semigroup, Leray projection and the Oseen operator as Fourier multipliers."""

from typing import TypeVar

import numpy as np

from src.errors import ParameterError
from src.fields.grid import GridSpec
from src.fields.models import ScalarField, TensorField, VectorField
from src.fields.spectral import forward, inverse

FieldT = TypeVar("FieldT", ScalarField, VectorField, TensorField)


def heat_multiplier(grid: GridSpec, t: float) -> np.ndarray:
    return np.exp(-t * grid.k_squared())


def _inverse_k_squared(grid: GridSpec) -> np.ndarray:
    k2 = sum(k**2 for k in grid.derivative_wavenumbers())
    return np.divide(1.0, k2, out=np.zeros_like(k2), where=k2 > 0)


def project_coefficients(coefficients: np.ndarray, grid: GridSpec) -> np.ndarray:
    """(delta_jm - k_j k_m / |k|^2) w_m on a (d, N, ..., N) coefficient array; k = 0 passes through."""
    k = grid.derivative_wavenumbers()
    k_dot_w = sum(k[m] * coefficients[m] for m in range(grid.dimension))
    scaled = k_dot_w * _inverse_k_squared(grid)
    return np.stack([coefficients[j] - k[j] * scaled for j in range(grid.dimension)])


def oseen_coefficients(tensor_coefficients: np.ndarray, grid: GridSpec, t: float) -> np.ndarray:
    """e^{-t|k|^2} P (i k_l F_ml) from tensor coefficients of shape (d, d, N, ..., N)."""
    k = grid.derivative_wavenumbers()
    d = grid.dimension
    rows = np.stack([sum(1j * k[l] * tensor_coefficients[m, l] for l in range(d)) for m in range(d)])
    return heat_multiplier(grid, t) * project_coefficients(rows, grid)


def heat_apply(f: FieldT, t: float) -> FieldT:
    """e^{t Delta} f through the multiplier e^{-t|k|^2}; t = 0 returns f itself."""
    if t < 0:
        raise ParameterError(f"heat flow time must be nonnegative, got {t}")
    if t == 0:
        return f
    grid = f.grid
    return f.with_values(inverse(heat_multiplier(grid, t) * forward(f.values, grid), grid))


def leray_project(u: VectorField) -> VectorField:
    grid = u.grid
    return u.with_values(inverse(project_coefficients(forward(u.values, grid), grid), grid))


def oseen_apply(F: TensorField, t: float) -> VectorField:
    """e^{t Delta} P div F in a single fused multiplier pass."""
    if t <= 0:
        raise ParameterError(f"Oseen operator needs t > 0, got {t}")
    grid = F.grid
    coefficients = oseen_coefficients(forward(F.values, grid), grid, t)
    return VectorField(grid=grid, values=inverse(coefficients, grid))
