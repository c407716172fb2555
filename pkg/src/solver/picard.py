"""Picard iteration u_{n+1} = e^{t Delta} u0 - B(u_n, u_n) on the slice times."""

import numpy as np
from loguru import logger
from pydantic import BaseModel

from src.analysis.models import SpaceTimeField
from src.analysis.weighted import k_norm, smallness_functional
from src.config import RunConfig
from src.errors import DivergenceConstraintError, NonContractionError, ParameterError, SmallnessError
from src.fields.models import VectorField
from src.fields.spectral import divergence
from src.solver.data import data_from_config, heat_flow, scale_to_smallness
from src.solver.duhamel import (
    Bilinear,
    calibrate_delta,
    contraction_params,
    duhamel_all,
    estimate_bilinear_constant,
)
from src.solver.models import PicardDiagnostics, SolverConfig

DIVERGENCE_TOLERANCE = 1e-8
NON_CONTRACTION_STREAK = 2


class PicardSolver:
    """Fixed-point construction of the mild solution for one configuration.

    ``bilinear`` replaces B for every iteration and for the residual; the
    default is the Duhamel quadrature.
    """

    def __init__(self, cfg: SolverConfig, bilinear: Bilinear | None = None, seed: int = 0) -> None:
        self.cfg = cfg
        self.bilinear = bilinear or duhamel_all
        self.custom_bilinear = bilinear is not None
        self.seed = seed

    def _norm(self, u: SpaceTimeField) -> float:
        return k_norm(u, self.cfg.params.alpha, 1.0)

    def _check_divergence(self, u0: VectorField) -> None:
        scale = u0.sup()
        residual = float(np.max(np.abs(divergence(u0).values)))
        if residual > DIVERGENCE_TOLERANCE * scale:
            raise DivergenceConstraintError(
                f"initial data is not divergence-free: |div u0| = {residual:.3e} > {DIVERGENCE_TOLERANCE} * {scale:.3e}"
            )

    def estimate_eta(self) -> float:
        estimate = estimate_bilinear_constant(
            contraction_params(self.cfg.params),
            self.cfg,
            self.cfg.bilinear_samples,
            self.seed,
            bilinear=self.bilinear,
        )
        return estimate.eta_hat

    def _smallness(self, y: SpaceTimeField, eta_hat: float | None, override: bool, diagnostics: PicardDiagnostics):
        delta = self.cfg.delta
        if delta is None:
            if eta_hat is None:
                raise ParameterError("delta is not configured and no bilinear constant is available")
            delta = calibrate_delta(eta_hat)
        diagnostics.delta = delta
        sampled = smallness_functional(
            y, self.cfg.params, self.cfg.smallness_variant, r_max=self.cfg.grid.half_width / 2.0
        )
        diagnostics.smallness_sup = sampled

        problems = []
        if sampled > delta:
            problems.append(f"sampled sup {sampled:.6e} exceeds delta {delta:.6e}")
        if eta_hat is not None and delta > calibrate_delta(eta_hat) * (1 + 1e-12):
            problems.append(f"delta {delta:.6e} exceeds 1/(4 eta_hat) = {calibrate_delta(eta_hat):.6e}")
        if not problems:
            return
        message = "smallness precondition violated: " + "; ".join(problems)
        if not override:
            raise SmallnessError(message)
        diagnostics.smallness_overridden = True
        logger.warning(f"{message} (overridden)")

    def solve(
        self,
        u0: VectorField,
        eta_hat: float | None = None,
        override_smallness: bool = False,
    ) -> tuple[SpaceTimeField, PicardDiagnostics]:
        """Iterate until the K^1_alpha norm of successive differences drops below the tolerance."""
        cfg = self.cfg
        if u0.grid.key != cfg.grid.key:
            raise ParameterError("initial data lives on a different grid than the solver")
        self._check_divergence(u0)

        if eta_hat is None and not self.custom_bilinear:
            eta_hat = self.estimate_eta()
        diagnostics = PicardDiagnostics(eta_hat=eta_hat)

        y = heat_flow(u0, cfg.times)
        self._smallness(y, eta_hat, override_smallness, diagnostics)

        logger.info(f"Picard iteration: {cfg.slices} slices, q={cfg.quadrature_order}, tol={cfg.tolerance:.1e}")
        u = y
        streak = 0
        for iteration in range(1, cfg.max_iterations + 1):
            following = y - self.bilinear(u, u, cfg)
            difference = self._norm(following - u)
            diagnostics.iterate_norms.append(self._norm(following))
            diagnostics.difference_norms.append(difference)
            diagnostics.iterations = iteration
            if len(diagnostics.difference_norms) > 1:
                previous = diagnostics.difference_norms[-2]
                ratio = difference / previous if previous > 0 else 0.0
                diagnostics.contraction_ratios.append(ratio)
                streak = streak + 1 if ratio >= 1.0 else 0
            u = following
            logger.debug(f"Iteration {iteration}: |u| = {diagnostics.iterate_norms[-1]:.6e}, diff = {difference:.3e}")

            if difference < cfg.tolerance:
                diagnostics.converged = True
                break
            if streak >= NON_CONTRACTION_STREAK:
                raise NonContractionError(
                    f"Picard iteration stopped contracting at iteration {iteration}", diagnostics
                )

        diagnostics.residual = self._norm(u - (y - self.bilinear(u, u, cfg)))
        if diagnostics.converged:
            logger.info(f"Converged after {diagnostics.iterations} iterations, residual {diagnostics.residual:.3e}")
        else:
            logger.warning(f"No convergence after {diagnostics.iterations} iterations")
        return u, diagnostics


def picard_solve(
    u0: VectorField,
    cfg: SolverConfig,
    eta_hat: float | None = None,
    override_smallness: bool = False,
) -> tuple[SpaceTimeField, PicardDiagnostics]:
    return PicardSolver(cfg).solve(u0, eta_hat=eta_hat, override_smallness=override_smallness)


class ConfiguredRun(BaseModel):
    """Everything a configured solve produces: scaled data, solution and diagnostics."""

    cfg: SolverConfig
    initial_data: VectorField
    solution: SpaceTimeField
    diagnostics: PicardDiagnostics


def solve_from_config(config: RunConfig, seed: int, override_smallness: bool = False) -> ConfiguredRun:
    """Estimate eta_hat, calibrate delta, scale the configured data to it and solve.

    An explicit ``delta`` in the configuration is used as is; the solver then
    rejects it when it exceeds 1/(4 eta_hat) unless ``override_smallness``.
    """
    cfg = SolverConfig.from_run_config(config)
    solver = PicardSolver(cfg, seed=seed)
    eta_hat = solver.estimate_eta()
    delta = cfg.delta if cfg.delta is not None else calibrate_delta(eta_hat)
    u0 = data_from_config(config, cfg.grid)
    u0, _ = scale_to_smallness(
        u0, cfg.params, delta, cfg.times, cfg.smallness_variant, r_max=cfg.grid.half_width / 2.0
    )
    solution, diagnostics = solver.solve(u0, eta_hat=eta_hat, override_smallness=override_smallness)
    return ConfiguredRun(cfg=cfg, initial_data=u0, solution=solution, diagnostics=diagnostics)
