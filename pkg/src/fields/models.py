"""Real-valued fields sampled on a ``GridSpec`` and their spectral counterpart."""

from typing import ClassVar

try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.errors import GridError
from src.fields.grid import GridSpec


def _readonly(values: np.ndarray, dtype) -> np.ndarray:
    view = np.ascontiguousarray(values, dtype=dtype).view()
    view.flags.writeable = False
    return view


class _GridField(BaseModel):
    """Shared behaviour: shape checks, read-only samples, linear algebra."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    values: np.ndarray

    #: number of leading component axes (0 scalar, 1 vector, 2 tensor)
    rank: ClassVar[int] = 0

    @model_validator(mode="after")
    def _check_values(self):
        d = self.grid.dimension
        expected = (d,) * self.rank + self.grid.shape
        values = _readonly(self.values, float)
        if values.shape != expected:
            raise GridError(f"{type(self).__name__} expects samples of shape {expected}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError(f"{type(self).__name__} samples must be finite")
        object.__setattr__(self, "values", values)
        return self

    def with_values(self, values: np.ndarray) -> Self:
        return type(self)(grid=self.grid, values=values)

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean (Frobenius for tensors) magnitude."""
        if self.rank == 0:
            return np.abs(self.values)
        axes = tuple(range(self.rank))
        return np.sqrt(np.sum(self.values**2, axis=axes))

    def sup(self) -> float:
        return float(self.magnitude().max())

    def require_same_grid(self, other: "_GridField") -> None:
        if self.grid.key != other.grid.key:
            raise GridError(f"grid mismatch: {self.grid.key} vs {other.grid.key}")

    def __add__(self, other: Self) -> Self:
        self.require_same_grid(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: Self) -> Self:
        self.require_same_grid(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: float) -> Self:
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> Self:
        return self.with_values(-self.values)


class ScalarField(_GridField):
    rank: ClassVar[int] = 0

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid=grid, values=np.zeros(grid.shape))

    @property
    def samples(self) -> np.ndarray:
        return self.values


class VectorField(_GridField):
    """d components sharing one grid, stored as an array of shape (d, N, ..., N)."""

    rank: ClassVar[int] = 1

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid=grid, values=np.zeros((grid.dimension,) + grid.shape))

    @classmethod
    def from_components(cls, components: list[ScalarField]) -> "VectorField":
        grid = components[0].grid
        for component in components[1:]:
            components[0].require_same_grid(component)
        return cls(grid=grid, values=np.stack([c.values for c in components]))

    def component(self, i: int) -> ScalarField:
        return ScalarField(grid=self.grid, values=self.values[i])


class TensorField(_GridField):
    """d x d components F_ij sharing one grid, shape (d, d, N, ..., N)."""

    rank: ClassVar[int] = 2

    @classmethod
    def zeros(cls, grid: GridSpec) -> "TensorField":
        d = grid.dimension
        return cls(grid=grid, values=np.zeros((d, d) + grid.shape))

    def component(self, i: int, j: int) -> ScalarField:
        return ScalarField(grid=self.grid, values=self.values[i, j])

    def transpose(self) -> "TensorField":
        return self.with_values(np.swapaxes(self.values, 0, 1))


class SpectralField(BaseModel):
    """Complex coefficients F_k, k_j in (pi/L)·{-N/2, ..., N/2-1}, FFT ordering."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    coefficients: np.ndarray

    @model_validator(mode="after")
    def _check_coefficients(self):
        coefficients = _readonly(self.coefficients, complex)
        if coefficients.shape != self.grid.shape:
            raise GridError(f"SpectralField expects shape {self.grid.shape}, got {coefficients.shape}")
        object.__setattr__(self, "coefficients", coefficients)
        return self

    def is_conjugate_symmetric(self, rtol: float = 1e-12) -> bool:
        """F(-k) == conj F(k) on every mode whose mirror lies on the grid.

        Modes carrying the Nyquist index on any axis have no partner and are
        skipped.
        """
        mirrored = self.coefficients
        for axis in range(self.grid.dimension):
            mirrored = np.roll(np.flip(mirrored, axis=axis), 1, axis=axis)
        paired = np.ones(self.grid.shape, dtype=bool)
        nyquist = self.grid.points_per_axis // 2
        for axis in range(self.grid.dimension):
            index = [slice(None)] * self.grid.dimension
            index[axis] = nyquist
            paired[tuple(index)] = False
        scale = max(float(np.abs(self.coefficients).max()), 1e-300)
        gap = np.abs(mirrored - np.conj(self.coefficients))[paired]
        return bool(gap.max() <= rtol * scale)
