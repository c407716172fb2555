"""Truncated cubic grid on which every field lives.

The whole space R^d is replaced by the periodic box [-L, L]^d sampled at
cell-centred nodes x_i = -L + (i + 1/2) h, h = 2L/N, so no node sits on the
origin and weights |x|^{-beta} are always finite.

Error model of the periodic surrogate: a Gaussian of variance 2t centred in
the box leaks e^{-(L - R0)^2 / 4t} of its peak through the boundary.  Keeping
L >= R0 + 6 sqrt(T_max) puts the wrap-around below e^{-9} of the peak; see
``truncation_margin``.
"""

from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.errors import GridError

MIN_POINTS = 16
MAX_POINTS_3D = 64


def _check_grid(dimension: int, half_width: float, points_per_axis: int) -> None:
    if dimension not in (2, 3):
        raise GridError(f"dimension must be 2 or 3, got {dimension}")
    if points_per_axis % 2 != 0:
        raise GridError(f"N must be even, got {points_per_axis}")
    if points_per_axis < MIN_POINTS:
        raise GridError(f"N must be at least {MIN_POINTS}, got {points_per_axis}")
    if dimension == 3 and points_per_axis > MAX_POINTS_3D:
        raise GridError(f"N must not exceed {MAX_POINTS_3D} in three dimensions")
    if not half_width > 0:
        raise GridError(f"L must be positive, got {half_width}")


class GridSpec(BaseModel):
    """Immutable description of the box [-L, L]^d with N cell-centred nodes per axis."""

    model_config = ConfigDict(frozen=True)

    dimension: int
    half_width: float
    points_per_axis: int

    @model_validator(mode="after")
    def _validate(self):
        _check_grid(self.dimension, self.half_width, self.points_per_axis)
        return self

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def node_count(self) -> int:
        return self.points_per_axis**self.dimension

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.dimension

    @property
    def key(self) -> tuple[int, float, int]:
        return (self.dimension, self.half_width, self.points_per_axis)

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return _axis_coordinates(self.points_per_axis, self.half_width)

    def coordinates(self) -> list[np.ndarray]:
        """Sparse (broadcastable) coordinate arrays, one per axis."""
        return _sparse_coordinates(*self.key)

    def radius(self) -> np.ndarray:
        """Euclidean distance |x| of every node to the origin."""
        return _radius(*self.key)

    def axis_wavenumbers(self) -> np.ndarray:
        """Wavenumbers (pi/L)·{-N/2, ..., N/2-1} in FFT order."""
        return _axis_wavenumbers(self.points_per_axis, self.half_width)

    def wavenumbers(self) -> list[np.ndarray]:
        """Sparse wavenumber arrays k_j, one per axis, in FFT order."""
        return _sparse_wavenumbers(*self.key)

    def derivative_wavenumbers(self) -> list[np.ndarray]:
        """Sparse wavenumbers for first-order multipliers: the unpaired Nyquist entry is zero.

        With it zeroed, i k commutes with taking the real part, so discrete
        identities such as div(perp grad psi) = 0 hold to round-off.
        """
        return _sparse_derivative_wavenumbers(*self.key)

    def k_squared(self) -> np.ndarray:
        return _k_squared(*self.key)

    def resolvable_times(self) -> tuple[float, float]:
        """Window h^2 <= t <= (L/6)^2 in which the periodic box represents R^d."""
        return self.spacing**2, (self.half_width / 6.0) ** 2

    def truncation_margin(self, support_radius: float, t_max: float) -> float:
        """Slack L - (R0 + 6 sqrt(T_max)); negative means wrap-around above e^{-9}."""
        return self.half_width - (support_radius + 6.0 * np.sqrt(t_max))


def make_grid(d: int, L: float, N: int) -> GridSpec:
    """Build a grid, rejecting odd or tiny N, non-positive L and d outside {2, 3}."""
    _check_grid(d, L, N)
    return GridSpec(dimension=d, half_width=float(L), points_per_axis=N)


# --- Cached geometry (read-only arrays shared between fields) ---


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@lru_cache(maxsize=32)
def _axis_coordinates(n: int, half_width: float) -> np.ndarray:
    h = 2.0 * half_width / n
    return _frozen(-half_width + (np.arange(n) + 0.5) * h)


@lru_cache(maxsize=32)
def _sparse_coordinates(d: int, half_width: float, n: int) -> list[np.ndarray]:
    axis = _axis_coordinates(n, half_width)
    return [_frozen(np.array(c)) for c in np.meshgrid(*([axis] * d), indexing="ij", sparse=True)]


@lru_cache(maxsize=16)
def _radius(d: int, half_width: float, n: int) -> np.ndarray:
    coords = _sparse_coordinates(d, half_width, n)
    return _frozen(np.sqrt(sum(c**2 for c in coords)))


@lru_cache(maxsize=32)
def _axis_wavenumbers(n: int, half_width: float) -> np.ndarray:
    return _frozen(np.fft.fftfreq(n, d=1.0 / n) * (np.pi / half_width))


@lru_cache(maxsize=32)
def _sparse_wavenumbers(d: int, half_width: float, n: int) -> list[np.ndarray]:
    k = _axis_wavenumbers(n, half_width)
    return [_frozen(np.array(c)) for c in np.meshgrid(*([k] * d), indexing="ij", sparse=True)]


@lru_cache(maxsize=32)
def _sparse_derivative_wavenumbers(d: int, half_width: float, n: int) -> list[np.ndarray]:
    k = np.array(_axis_wavenumbers(n, half_width))
    k[n // 2] = 0.0
    return [_frozen(np.array(c)) for c in np.meshgrid(*([k] * d), indexing="ij", sparse=True)]


@lru_cache(maxsize=16)
def _k_squared(d: int, half_width: float, n: int) -> np.ndarray:
    return _frozen(sum(k**2 for k in _sparse_wavenumbers(d, half_width, n)))


@lru_cache(maxsize=16)
def _node_phase(d: int, half_width: float, n: int) -> np.ndarray:
    """e^{-i k·x_0} with x_0 the first node, referencing coefficients to physical x."""
    h = 2.0 * half_width / n
    x0 = -half_width + 0.5 * h
    axis_phase = np.exp(-1j * _axis_wavenumbers(n, half_width) * x0)
    phase = axis_phase
    for _ in range(d - 1):
        phase = np.multiply.outer(phase, axis_phase)
    return _frozen(phase)
