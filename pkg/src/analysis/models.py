"""Exponent sets, space-time fields and decay reports."""

import enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.analysis.fitting import default_window, fit_decay_exponent
from src.errors import FitError, GridError, ParameterError
from src.fields.grid import GridSpec
from src.fields.models import VectorField

R_SQUARED_MIN = 0.98


# --- Exponents ---


class ExponentSet(BaseModel):
    """Weights of the initial-data estimate: 0 <= tilde_gamma <= gamma, 0 <= alpha <= 1, 0 <= tilde_beta <= beta."""

    model_config = ConfigDict(frozen=True)

    gamma: float
    tilde_gamma: float
    alpha: float
    beta: float
    tilde_beta: float

    @model_validator(mode="after")
    def _initial_ranges(self):
        if not 0 <= self.tilde_gamma <= self.gamma <= self.beta:
            raise ParameterError("need 0 <= tilde_gamma <= gamma <= beta")
        if not 0 <= self.alpha <= 1:
            raise ParameterError("need 0 <= alpha <= 1")
        if not 0 <= self.tilde_beta <= self.beta:
            raise ParameterError("need 0 <= tilde_beta <= beta")
        return self


class WeightParams(ExponentSet):
    """Exponents admissible for global existence with decay in dimension ``dimension``."""

    dimension: int = 2
    hat_beta: float | None = None

    @model_validator(mode="after")
    def _existence_ranges(self):
        d = self.dimension
        if not 0 <= self.gamma <= 1 <= self.beta < d:
            raise ParameterError(f"need 0 <= gamma <= 1 <= beta < {d}")
        if not self.beta - 2 < self.tilde_beta <= self.beta:
            raise ParameterError("need beta - 2 < tilde_beta <= beta")
        if not 0 < self.alpha < 1:
            raise ParameterError("need 0 < alpha < 1")
        if not self.beta - self.tilde_beta - 1 < self.alpha < d - self.tilde_beta:
            raise ParameterError("need beta - tilde_beta - 1 < alpha < d - tilde_beta")
        if self.hat_beta is not None:
            if not 0 <= self.hat_beta <= self.beta:
                raise ParameterError("need 0 <= hat_beta <= beta")
            if not self.alpha + self.tilde_beta - 1 < self.hat_beta <= self.alpha + self.tilde_beta:
                raise ParameterError("need alpha + tilde_beta - 1 < hat_beta <= alpha + tilde_beta")
        return self


# --- Space-time samples ---


def geometric_times(t_min: float, t_max: float, count: int) -> np.ndarray:
    if not 0 < t_min < t_max or count < 2:
        raise ParameterError("need 0 < t_min < t_max and at least two times")
    return np.geomspace(t_min, t_max, count)


class SpaceTimeField(BaseModel):
    """One vector field per time on a geometric time grid; ``values`` has shape (M, d, N, ..., N)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    times: np.ndarray
    values: np.ndarray

    @model_validator(mode="after")
    def _check(self):
        times = np.array(self.times, dtype=float)
        values = np.ascontiguousarray(self.values, dtype=float)
        if times.ndim != 1 or times.size == 0 or times[0] <= 0:
            raise ParameterError("times must be a non-empty sequence of positive values")
        if times.size > 1:
            if np.any(np.diff(times) <= 0):
                raise ParameterError("times must be strictly increasing")
            ratios = times[1:] / times[:-1]
            if np.max(np.abs(ratios / ratios[0] - 1.0)) > 1e-12:
                raise ParameterError("times must form a geometric progression")
        expected = (times.size, self.grid.dimension) + self.grid.shape
        if values.shape != expected:
            raise GridError(f"SpaceTimeField expects shape {expected}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError("SpaceTimeField samples must be finite")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        return self

    @classmethod
    def from_slices(cls, times: np.ndarray, slices: list[VectorField]) -> "SpaceTimeField":
        grid = slices[0].grid
        for field in slices[1:]:
            slices[0].require_same_grid(field)
        return cls(grid=grid, times=times, values=np.stack([s.values for s in slices]))

    @classmethod
    def zeros(cls, grid: GridSpec, times: np.ndarray) -> "SpaceTimeField":
        shape = (len(times), grid.dimension) + grid.shape
        return cls(grid=grid, times=times, values=np.zeros(shape))

    def __len__(self) -> int:
        return int(self.times.size)

    def slice(self, m: int) -> VectorField:
        return VectorField(grid=self.grid, values=self.values[m])

    def magnitudes(self) -> np.ndarray:
        """|u(x, t_m)| with shape (M, N, ..., N)."""
        return np.sqrt(np.sum(self.values**2, axis=1))

    def with_values(self, values: np.ndarray) -> "SpaceTimeField":
        return SpaceTimeField(grid=self.grid, times=self.times, values=values)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        if self.grid.key != other.grid.key or not np.array_equal(self.times, other.times):
            raise GridError("space-time fields live on different grids")
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: float) -> "SpaceTimeField":
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__


# --- Decay reports ---


class DecayMode(str, enum.Enum):
    EQUAL = "equal"
    UPPER_BOUND = "upper_bound"
    NO_GROWTH = "no_growth"
    FLAT = "flat"
    STABLE = "stable"


class DecayReport(BaseModel):
    """Outcome of one exponent or flatness check, self-contained in its samples.

    ``samples`` holds (abscissa, value) pairs; the abscissa is a time or a
    radius according to ``axis``.  In ``stable`` mode the samples are
    (radius cap, norm) and the verdict compares the last value with the
    first.  A report with ``parts`` passes iff every part passes.

    Without an explicit ``window`` the fit uses the default one, which drops
    the outer fifth of the log range at each end; the window applied is
    stored.  ``r_squared_waived`` marks equal/upper-bound verdicts whose
    target lies within the tolerance of 0, where the R^2 gate does not apply.
    """

    name: str
    mode: DecayMode
    axis: str = "t"
    target_slope: float = 0.0
    tolerance: float
    window: tuple[float, float] | None = None
    samples: list[tuple[float, float]] = Field(default_factory=list)
    fitted_slope: float | None = None
    intercept: float | None = None
    r_squared: float | None = None
    sup_constant: float | None = None
    degenerate: bool = False
    r_squared_waived: bool = False
    passed: bool = False
    note: str = ""
    parts: list["DecayReport"] = Field(default_factory=list)

    @classmethod
    def from_series(
        cls,
        name: str,
        mode: DecayMode,
        samples: list[tuple[float, float]],
        *,
        tolerance: float,
        target_slope: float = 0.0,
        window: tuple[float, float] | None = None,
        axis: str = "t",
        sup_constant: float | None = None,
    ) -> "DecayReport":
        abscissae = [float(s) for s, _ in samples]
        if window is None and mode != DecayMode.STABLE and abscissae and min(abscissae) > 0:
            window = default_window(abscissae)
        report = cls(
            name=name,
            mode=mode,
            axis=axis,
            target_slope=target_slope,
            tolerance=tolerance,
            window=window,
            samples=[(float(s), float(v)) for s, v in samples],
            sup_constant=sup_constant,
        )
        return report.recompute()

    @classmethod
    def combine(cls, name: str, parts: list["DecayReport"], sup_constant: float | None = None) -> "DecayReport":
        return cls(
            name=name,
            mode=DecayMode.STABLE,
            tolerance=0.0,
            parts=parts,
            sup_constant=sup_constant,
            degenerate=bool(parts) and all(p.degenerate for p in parts),
            passed=all(p.passed for p in parts),
        )

    def recompute(self) -> "DecayReport":
        """Re-derive fit and verdict from the stored samples."""
        if self.parts:
            parts = [part.recompute() for part in self.parts]
            return self.model_copy(update={"parts": parts, "passed": all(p.passed for p in parts)})

        values = [v for _, v in self.samples]
        if values and all(v == 0.0 for v in values):
            return self.model_copy(
                update={"fitted_slope": 0.0, "r_squared": 1.0, "degenerate": True, "passed": True, "note": ""}
            )

        if self.mode == DecayMode.STABLE:
            if len(values) < 2 or values[0] <= 0:
                return self.model_copy(update={"passed": False, "note": "stability needs two positive samples"})
            change = abs(values[-1] - values[0]) / values[0]
            return self.model_copy(update={"fitted_slope": change, "passed": change <= self.tolerance, "note": ""})

        try:
            fit = fit_decay_exponent(self.samples, self.window)
        except FitError as exc:
            return self.model_copy(
                update={
                    "fitted_slope": None,
                    "intercept": None,
                    "r_squared": None,
                    "r_squared_waived": False,
                    "passed": False,
                    "note": str(exc),
                }
            )

        slope = fit.slope
        waived = False
        if self.mode == DecayMode.EQUAL:
            within = abs(slope - self.target_slope) <= self.tolerance
        elif self.mode == DecayMode.UPPER_BOUND:
            within = slope <= self.target_slope + self.tolerance
        elif self.mode == DecayMode.NO_GROWTH:
            within = slope <= self.tolerance
        else:
            within = abs(slope) <= self.tolerance
        # R^2 only qualifies a power law with a visible exponent
        if self.mode in (DecayMode.EQUAL, DecayMode.UPPER_BOUND):
            if abs(self.target_slope) > self.tolerance:
                within = within and fit.r_squared >= R_SQUARED_MIN
            else:
                waived = True
        return self.model_copy(
            update={
                "fitted_slope": slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "r_squared_waived": waived,
                "passed": bool(within),
                "note": "",
            }
        )
