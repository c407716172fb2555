"""Spectral transform pair and the differential algebra built on it.

Coefficients are referenced to physical coordinates,

    F_k = N^{-d} sum_n f(x_n) e^{-i k.x_n},      f(x_n) = sum_k F_k e^{i k.x_n},

so a product of multipliers in k is a convolution in x and the box volume
appears explicitly in Parseval: sum |f|^2 h^d = (2L)^d sum |F_k|^2.

First-order multipliers use ``GridSpec.derivative_wavenumbers`` (Nyquist entry
zeroed); with that choice div P u = 0 and div perp grad = 0 hold to round-off
on real fields.
"""

import numpy as np
from scipy import fft

from src.config import settings
from src.errors import GridError
from src.fields.grid import GridSpec, _node_phase
from src.fields.models import ScalarField, SpectralField, TensorField, VectorField


def _axes(grid: GridSpec) -> tuple[int, ...]:
    return tuple(range(-grid.dimension, 0))


def forward(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Transform the trailing d axes of ``values`` (any number of component axes in front)."""
    phase = _node_phase(*grid.key)
    coefficients = fft.fftn(values, axes=_axes(grid), workers=settings.threads)
    return coefficients * phase / grid.node_count


def inverse(coefficients: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Real samples from coefficients over the trailing d axes."""
    phase = np.conj(_node_phase(*grid.key))
    values = fft.ifftn(coefficients * phase, axes=_axes(grid), workers=settings.threads)
    return np.real(values) * grid.node_count


def to_spectral(f: ScalarField) -> SpectralField:
    return SpectralField(grid=f.grid, coefficients=forward(f.values, f.grid))


def from_spectral(F: SpectralField) -> ScalarField:
    return ScalarField(grid=F.grid, values=inverse(F.coefficients, F.grid))


def parseval_check(f: ScalarField) -> tuple[float, float]:
    """Return (sum |f|^2 h^d, (2L)^d sum |F_k|^2); equal up to round-off."""
    grid = f.grid
    physical = float(np.sum(f.values**2) * grid.spacing**grid.dimension)
    spectral = float(grid.volume * np.sum(np.abs(forward(f.values, grid)) ** 2))
    return physical, spectral


# --- Field algebra ---


def tensor_product(u: VectorField, v: VectorField) -> TensorField:
    """(u ⊗ v)_ij = u_i v_j at every node."""
    u.require_same_grid(v)
    return TensorField(grid=u.grid, values=np.einsum("i...,j...->ij...", u.values, v.values))


def divergence(u: VectorField) -> ScalarField:
    """Spectral divergence sum_l i k_l u_l."""
    grid = u.grid
    coefficients = forward(u.values, grid)
    k = grid.derivative_wavenumbers()
    total = sum(1j * k[l] * coefficients[l] for l in range(grid.dimension))
    return ScalarField(grid=grid, values=inverse(total, grid))


def gradient(f: ScalarField) -> VectorField:
    grid = f.grid
    coefficients = forward(f.values, grid)
    derivatives = np.stack([1j * k * coefficients for k in grid.derivative_wavenumbers()])
    return VectorField(grid=grid, values=inverse(derivatives, grid))


def perp_gradient(psi: ScalarField) -> VectorField:
    """Planar stream-function velocity (-d2 psi, d1 psi)."""
    grid = psi.grid
    if grid.dimension != 2:
        raise GridError("perp_gradient is defined for d = 2 only")
    coefficients = forward(psi.values, grid)
    k1, k2 = grid.derivative_wavenumbers()
    derivatives = np.stack([-1j * k2 * coefficients, 1j * k1 * coefficients])
    return VectorField(grid=grid, values=inverse(derivatives, grid))


def curl(potential: VectorField) -> VectorField:
    grid = potential.grid
    if grid.dimension != 3:
        raise GridError("curl is defined for d = 3 only")
    P = forward(potential.values, grid)
    k1, k2, k3 = grid.derivative_wavenumbers()
    derivatives = np.stack(
        [
            1j * (k2 * P[2] - k3 * P[1]),
            1j * (k3 * P[0] - k1 * P[2]),
            1j * (k1 * P[1] - k2 * P[0]),
        ]
    )
    return VectorField(grid=grid, values=inverse(derivatives, grid))


def tensor_divergence(F: TensorField) -> VectorField:
    """Row divergence (div F)_i = sum_j d_j F_ij."""
    grid = F.grid
    coefficients = forward(F.values, grid)
    k = grid.derivative_wavenumbers()
    rows = np.stack(
        [sum(1j * k[j] * coefficients[i, j] for j in range(grid.dimension)) for i in range(grid.dimension)]
    )
    return VectorField(grid=grid, values=inverse(rows, grid))
