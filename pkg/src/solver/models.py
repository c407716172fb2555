"""Solver configuration and run diagnostics."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.analysis.models import WeightParams, geometric_times
from src.config import RunConfig
from src.errors import ParameterError
from src.fields.grid import GridSpec, make_grid
from src.solver.data import configured_core_radius, support_radius

MIN_QUADRATURE_ORDER = 8


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    grid: GridSpec
    t_min: float
    t_max: float
    slices: int = 16
    quadrature_order: int = 8
    max_iterations: int = 40
    tolerance: float = 1e-8
    delta: float | None = None
    params: WeightParams
    safety_factor: float = 2.0
    bilinear_samples: int = 8
    smallness_variant: Literal["three_term", "two_term", "single_term"] = "three_term"
    support_radius: float = 0.0

    @model_validator(mode="after")
    def _check(self):
        t_lo, t_hi = self.grid.resolvable_times()
        if self.t_min < t_lo * (1 - 1e-12):
            raise ParameterError(f"t_min = {self.t_min} is below h^2 = {t_lo}")
        if self.t_max > t_hi * (1 + 1e-12):
            raise ParameterError(f"t_max = {self.t_max} exceeds (L/6)^2 = {t_hi}")
        if self.support_radius < 0:
            raise ParameterError("support radius must be nonnegative")
        margin = self.grid.truncation_margin(self.support_radius, self.t_max)
        if margin < -1e-12 * self.grid.half_width:
            raise ParameterError(
                f"t_max = {self.t_max} breaks L >= R0 + 6 sqrt(t_max) for R0 = {self.support_radius} "
                f"(margin {margin:.4g})"
            )
        if not self.t_min < self.t_max:
            raise ParameterError("t_min must be smaller than t_max")
        if self.slices < 2:
            raise ParameterError("at least two time slices are required")
        if self.quadrature_order < MIN_QUADRATURE_ORDER:
            raise ParameterError(f"quadrature order must be at least {MIN_QUADRATURE_ORDER}")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be positive")
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ParameterError("delta must be positive")
        if self.safety_factor < 1:
            raise ParameterError("safety factor must be at least 1")
        if self.params.dimension != self.grid.dimension:
            raise ParameterError("weight parameters and grid disagree on the dimension")
        return self

    @property
    def times(self) -> np.ndarray:
        return geometric_times(self.t_min, self.t_max, self.slices)

    @classmethod
    def from_run_config(cls, config: RunConfig) -> "SolverConfig":
        g, s, w = config.grid, config.solver, config.weights
        grid = make_grid(g.dimension, g.half_width, g.points)
        t_lo, t_hi = grid.resolvable_times()
        r0 = support_radius(s.data_kind, configured_core_radius(config, grid))
        if r0 >= grid.half_width:
            raise ParameterError(f"data support radius {r0} does not fit in the box of half-width {grid.half_width}")
        # largest T_max that keeps the wrap-around below e^{-9}
        t_fit = min(t_hi, ((grid.half_width - r0) / 6.0) ** 2)
        params = WeightParams(
            gamma=w.gamma,
            tilde_gamma=w.tilde_gamma,
            alpha=w.alpha,
            beta=w.beta,
            tilde_beta=w.tilde_beta,
            hat_beta=w.hat_beta,
            dimension=g.dimension,
        )
        return cls(
            grid=grid,
            t_min=s.t_min if s.t_min is not None else t_lo,
            t_max=s.t_max if s.t_max is not None else t_fit,
            slices=s.slices,
            quadrature_order=s.quadrature_order,
            max_iterations=s.max_iterations,
            tolerance=s.tolerance,
            delta=s.delta,
            params=params,
            safety_factor=s.safety_factor,
            bilinear_samples=s.bilinear_samples,
            smallness_variant=s.smallness_variant,
            support_radius=r0,
        )


class BilinearEstimate(BaseModel):
    """Sampled ratios ||B(u,v)|| / (||u|| ||v||); ``eta_hat`` is the max, inflated by the safety factor."""

    ratios: list[float]
    max_ratio: float
    safety_factor: float
    eta_hat: float


class PicardDiagnostics(BaseModel):
    iterate_norms: list[float] = Field(default_factory=list)
    difference_norms: list[float] = Field(default_factory=list)
    contraction_ratios: list[float] = Field(default_factory=list)
    residual: float | None = None
    converged: bool = False
    iterations: int = 0
    eta_hat: float | None = None
    delta: float | None = None
    smallness_sup: float | None = None
    smallness_overridden: bool = False
