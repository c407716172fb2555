"""The verification suite: one configured run of every numerical check."""

import threading
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from loguru import logger

from src.analysis.models import DecayMode, DecayReport, ExponentSet, geometric_times
from src.config import CHECK_NAMES, RunConfig, Settings, settings as default_settings
from src.errors import NonContractionError
from src.fields.grid import make_grid
from src.kernels.audit import (
    KernelKind,
    audit_kernel_bound,
    oseen_decay_profile,
    oseen_self_similarity,
    sample_directions,
)
from src.solver.data import DataKind, configured_core_radius, make_divfree_data
from src.solver.models import SolverConfig
from src.solver.picard import ConfiguredRun, solve_from_config
from src.verify.integrals import (
    YOUNG_TOLERANCE,
    IntegralPart,
    beta_integral_check,
    draw_exponents,
    young_reference_constant,
)
from src.verify.lemmas import (
    verify_heat_estimate,
    verify_initial_estimate,
    verify_oseen_estimate,
    verify_weighted_young,
)
from src.verify.models import ContractionCheck, ReferenceCheck, SelfSimilarityCheck, VerificationSuiteResult
from src.verify.solution import verify_bootstrap, verify_solution_decay

SIMILARITY_TOLERANCE = 1e-3
PROFILE_TOLERANCE = 0.15
KERNEL_SAMPLE_TIMES = 3
KERNEL_SAMPLE_RADII = 6
PROFILE_START = 4.0
PROFILE_RADII = 10


class VerificationService:
    """Runs the checks named in ``[verify] checks`` and merges their results.

    Each check draws from its own child of ``SeedSequence(seed)``, so the
    outcome does not depend on which checks run or on the thread count.
    """

    def __init__(self, run_config: RunConfig, settings: Settings = default_settings) -> None:
        self.config = run_config
        self.settings = settings
        self.solver_config = SolverConfig.from_run_config(run_config)
        self._solve_lock = threading.Lock()
        self._solved: ConfiguredRun | NonContractionError | None = None
        self._solve_seed = 0

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def run(self, seed: int) -> VerificationSuiteResult:
        children = np.random.SeedSequence(seed).spawn(len(CHECK_NAMES) + 1)
        self._solve_seed = int(children[-1].generate_state(1)[0])
        self._solved = None
        seeds = dict(zip(CHECK_NAMES, children))
        selected = [name for name in CHECK_NAMES if name in self.config.verify.checks]
        logger.info(f"Verification suite: {len(selected)} checks, seed={seed}, threads={self.settings.threads}")

        checks: dict[str, Callable[[np.random.Generator], VerificationSuiteResult]] = {
            "beta_integrals": self._beta_integrals,
            "weighted_young": self._weighted_young,
            "heat_estimate": self._heat_estimate,
            "oseen_estimate": self._oseen_estimate,
            "kernel_audit": self._kernel_audit,
            "initial_estimate": self._initial_estimate,
            "solution_decay": self._solution_decay,
            "bootstrap": self._bootstrap,
            "picard_contraction": self._picard_contraction,
        }

        def one(name: str) -> VerificationSuiteResult:
            logger.info(f"Running check {name}")
            return checks[name](np.random.default_rng(seeds[name]))

        if self.settings.threads > 1:
            with ThreadPoolExecutor(max_workers=self.settings.threads) as pool:
                fragments = list(pool.map(one, selected))
        else:
            fragments = [one(name) for name in selected]

        result = _merge(fragments)
        if result.passed:
            logger.info("All checks passed")
        else:
            logger.warning(f"Failed checks: {', '.join(result.failed_checks())}")
        return result

    # ------------------------------------------------------------------
    # Checks
    # ------------------------------------------------------------------

    def _beta_integrals(self, rng: np.random.Generator) -> VerificationSuiteResult:
        verify = self.config.verify
        checks = []
        for part in IntegralPart:
            for t in verify.beta_times:
                for _ in range(verify.beta_draws):
                    gamma, theta = draw_exponents(part, rng)
                    checks.append(beta_integral_check(gamma, theta, t, part))
        return VerificationSuiteResult.assemble(reference_checks=checks)

    def _weighted_young(self, rng: np.random.Generator) -> VerificationSuiteResult:
        verify = self.config.verify
        reports = [
            verify_weighted_young(
                alpha,
                beta,
                self.config.grid.dimension,
                points=verify.young_points,
                half_width=verify.young_half_width,
                regularization_factor=verify.regularization_factor,
                mass_matched=verify.mass_matched,
            )
            for alpha, beta in zip(verify.young_alphas, verify.young_betas)
        ]
        numeric, closed = young_reference_constant(0.75, 0.75)
        reference = ReferenceCheck.compare(
            "young-constant/d=1", {"alpha": 0.75, "beta": 0.75}, numeric, closed, YOUNG_TOLERANCE
        )
        return VerificationSuiteResult.assemble(decay_reports=reports, reference_checks=[reference])

    def _lemma_grid(self):
        verify = self.config.verify
        return make_grid(self.config.grid.dimension, verify.lemma_half_width, verify.lemma_points)

    def _heat_estimate(self, rng: np.random.Generator) -> VerificationSuiteResult:
        verify = self.config.verify
        grid = self._lemma_grid()
        reports = [
            verify_heat_estimate(
                gamma,
                verify.lemma_beta,
                grid,
                (verify.lemma_t_min, verify.lemma_t_max),
                samples=verify.lemma_samples,
                regularization_factor=verify.regularization_factor,
                mass_matched=verify.mass_matched,
            )
            for gamma in verify.lemma_gammas
        ]
        return VerificationSuiteResult.assemble(decay_reports=reports)

    def _oseen_estimate(self, rng: np.random.Generator) -> VerificationSuiteResult:
        verify = self.config.verify
        grid = self._lemma_grid()
        reports = [
            verify_oseen_estimate(
                gamma,
                verify.lemma_beta,
                grid,
                (verify.lemma_t_min, verify.lemma_t_max),
                samples=verify.lemma_samples,
                regularization_factor=verify.regularization_factor,
                mass_matched=verify.mass_matched,
            )
            for gamma in verify.lemma_gammas
        ]
        return VerificationSuiteResult.assemble(decay_reports=reports)

    def _audit_grid(self):
        verify = self.config.verify
        return make_grid(self.config.grid.dimension, verify.audit_half_width, verify.audit_points)

    def _kernel_audit(self, rng: np.random.Generator) -> VerificationSuiteResult:
        grid = self._audit_grid()
        d, h, L = grid.dimension, grid.spacing, grid.half_width
        t_lo, t_hi = grid.resolvable_times()
        times = geometric_times(4.0 * t_lo, t_hi / 4.0, KERNEL_SAMPLE_TIMES)
        direction = sample_directions(d, 1)[0]

        points = []
        for t in times:
            radii = list(np.geomspace(2.5 * h, L / 3.0, KERNEL_SAMPLE_RADII)) + [2.0 * np.sqrt(t)]
            points += [(tuple(r * direction), float(t)) for r in radii if 2.0 * h <= r <= L / 3.0]

        audits = [audit_kernel_bound(KernelKind.HEAT, a, points, grid) for a in (0.0, d / 2.0, float(d))]
        audits += [
            audit_kernel_bound(KernelKind.OSEEN, a, points, grid) for a in (0.0, (d + 1) / 2.0, float(d + 1))
        ]

        t = 4.0 * h**2
        root = np.sqrt(t)
        radii = np.geomspace(max(2.0 * h, root / 2.0), 4.0 * root, 4)
        gap = oseen_self_similarity(grid, t, radii)
        similarity = SelfSimilarityCheck(
            t=t,
            radii=[float(r) for r in radii],
            max_gap=gap,
            tolerance=SIMILARITY_TOLERANCE,
            passed=gap <= SIMILARITY_TOLERANCE,
        )

        # the Gaussian correction to the far field has decayed below e^{-4} past |y| = 4
        far = np.geomspace(PROFILE_START, L / (3.0 * root), PROFILE_RADII)
        scaled, profile = oseen_decay_profile(grid, t, far)
        decay = DecayReport.from_series(
            "oseen_decay_profile",
            DecayMode.NO_GROWTH,
            list(zip(scaled, profile)),
            tolerance=PROFILE_TOLERANCE,
            axis="r",
            sup_constant=float(np.max(profile)),
        )
        return VerificationSuiteResult.assemble(
            decay_reports=[decay], kernel_audits=audits, similarity_checks=[similarity]
        )

    def _initial_estimate(self, rng: np.random.Generator) -> VerificationSuiteResult:
        cfg = self.solver_config
        w = self.config.weights
        core = configured_core_radius(self.config, cfg.grid)
        data = make_divfree_data(DataKind.VORTEX, w.beta, 1.0, cfg.grid, core_radius=core)
        params = ExponentSet(
            gamma=w.gamma, tilde_gamma=w.tilde_gamma, alpha=w.alpha, beta=w.beta, tilde_beta=w.tilde_beta
        )
        times = geometric_times(cfg.t_min, cfg.t_max, self.config.verify.lemma_samples)
        return VerificationSuiteResult.assemble(decay_reports=[verify_initial_estimate(data, params, times)])

    # The solution checks share one solve.

    def _solution(self) -> ConfiguredRun | NonContractionError:
        with self._solve_lock:
            if self._solved is None:
                try:
                    self._solved = solve_from_config(self.config, self._solve_seed)
                except NonContractionError as exc:
                    self._solved = exc
            return self._solved

    def _failed_solve(self, name: str, exc: NonContractionError) -> VerificationSuiteResult:
        report = DecayReport(name=name, mode=DecayMode.STABLE, tolerance=0.0, passed=False, note=str(exc))
        return VerificationSuiteResult.assemble(decay_reports=[report])

    def _solution_decay(self, rng: np.random.Generator) -> VerificationSuiteResult:
        solved = self._solution()
        if isinstance(solved, NonContractionError):
            return self._failed_solve("solution_decay", solved)
        w = self.config.weights
        report = verify_solution_decay(solved.solution, w.gamma, w.beta, solved.diagnostics)
        return VerificationSuiteResult.assemble(decay_reports=[report])

    def _bootstrap(self, rng: np.random.Generator) -> VerificationSuiteResult:
        solved = self._solution()
        if isinstance(solved, NonContractionError):
            return self._failed_solve("bootstrap", solved)
        verify = self.config.verify
        report = verify_bootstrap(
            solved.solution,
            self.config.weights.beta,
            verify.bootstrap_alphas,
            verify.bootstrap_hat_betas,
            solved.diagnostics,
        )
        return VerificationSuiteResult.assemble(decay_reports=[report])

    def _picard_contraction(self, rng: np.random.Generator) -> VerificationSuiteResult:
        solved = self._solution()
        tolerance = self.solver_config.tolerance
        # a stopped iteration still carries its diagnostics
        check = ContractionCheck.from_diagnostics(solved.diagnostics, tolerance)
        logger.info(f"Picard contraction: max ratio {check.max_ratio:.3g}, residual {check.residual}")
        return VerificationSuiteResult.assemble(contraction_checks=[check])


def _merge(fragments: list[VerificationSuiteResult]) -> VerificationSuiteResult:
    return VerificationSuiteResult.assemble(
        decay_reports=[r for f in fragments for r in f.decay_reports],
        kernel_audits=[a for f in fragments for a in f.kernel_audits],
        similarity_checks=[c for f in fragments for c in f.similarity_checks],
        reference_checks=[c for f in fragments for c in f.reference_checks],
        contraction_checks=[c for f in fragments for c in f.contraction_checks],
    )
