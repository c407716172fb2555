"""Tests for the weighted convolution, heat, Oseen and solution decay checks."""

import math

import numpy as np
import pytest

from src.analysis.models import DecayMode, ExponentSet, SpaceTimeField, geometric_times
from src.errors import ParameterError
from src.fields.grid import make_grid
from src.fields.models import ScalarField
from src.solver.data import DataKind, make_divfree_data
from src.solver.models import PicardDiagnostics
from src.verify.lemmas import (
    outside_box_integral,
    powerlaw_profile,
    tensor_envelope,
    verify_heat_estimate,
    verify_initial_estimate,
    verify_oseen_estimate,
    verify_weighted_young,
    young_ratio_profile,
)
from src.verify.solution import verify_bootstrap, verify_solution_decay


@pytest.fixture(scope="module")
def lemma_grid():
    """L = 64, N = 512: sample times up to (L/6)^2 with eps = 0.5."""
    return make_grid(2, 64.0, 512)


LEMMA_TIMES = (12.5, 113.0)


class TestOutsideBoxIntegral:
    def test_square_closed_form(self):
        """Verify the exterior of a square against 8 int_0^{pi/4} cos = 4 sqrt(2) / a for p = 3."""
        a = 2.5
        assert outside_box_integral(3.0, [a, a]) == pytest.approx(4.0 * math.sqrt(2.0) / a, rel=1e-8)

    @pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
    def test_between_circles(self, p):
        """Verify that a rectangle's exterior integral lies between its inscribed and circumscribed circles."""
        a, b = 3.0, 5.0
        value = outside_box_integral(p, [a, b])
        assert 2 * math.pi * math.hypot(a, b) ** (2 - p) / (p - 2) <= value <= 2 * math.pi * a ** (2 - p) / (p - 2)

    def test_cube(self):
        """Verify the three-dimensional exterior integral between its bounding spheres."""
        a, p = 2.0, 4.0
        value = outside_box_integral(p, [a, a, a])
        assert 4 * math.pi * (a * math.sqrt(3.0)) ** (3 - p) / (p - 3) <= value <= 4 * math.pi * a ** (3 - p) / (p - 3)

    def test_requires_integrable_tail(self):
        """Verify that p <= d is rejected."""
        with pytest.raises(ParameterError):
            outside_box_integral(2.0, [1.0, 1.0])


class TestWeightedYoung:
    @pytest.mark.parametrize(("alpha", "beta"), [(1.25, 1.25), (1.5, 1.0)])
    def test_planar_pairs(self, alpha, beta):
        """Verify a flat, bounded ratio and the expected convolution decay for admissible pairs."""
        report = verify_weighted_young(alpha, beta, 2)
        assert report.passed, report
        ratio, convolution = report.parts
        assert ratio.mode == DecayMode.FLAT
        assert convolution.mode == DecayMode.EQUAL
        assert convolution.target_slope == pytest.approx(-(alpha + beta - 2))
        assert report.sup_constant > 0

    def test_convolution_exponent(self):
        """Verify that |x|^{-5/4} * |x|^{-5/4} decays like |x|^{-1/2}."""
        report = verify_weighted_young(1.25, 1.25, 2)
        assert report.parts[1].fitted_slope == pytest.approx(-0.5, abs=0.1)

    def test_zero_profiles(self, grid2d):
        """Verify that a vanishing convolution gives zero ratios instead of dividing by zero."""
        zero = ScalarField.zeros(grid2d)
        positions, conv, ratios = young_ratio_profile(zero, zero, 1.25, 1.25, [1.0, 2.0, 4.0], far_field=0.0)
        assert positions.size == 3
        assert np.all(conv == 0.0)
        assert np.all(ratios == 0.0)

    def test_ratio_positions_are_lattice_offsets(self, grid2d):
        """Verify that requested radii snap to multiples of the spacing."""
        f = powerlaw_profile(grid2d, 1.25, 1.0)
        positions, _, _ = young_ratio_profile(f, f, 1.25, 1.25, [1.1, 2.0, 2.1])
        np.testing.assert_allclose(positions, [1.0, 2.0])

    @pytest.mark.parametrize(("alpha", "beta"), [(1.0, 0.5), (2.0, 1.0), (0.0, 2.5)])
    def test_inadmissible(self, alpha, beta):
        """Verify that pairs outside 0 < alpha, beta < d < alpha + beta are rejected."""
        with pytest.raises(ParameterError):
            verify_weighted_young(alpha, beta, 2)

    def test_empty_window(self):
        """Verify that a grid too coarse for five dyadic radii is rejected."""
        with pytest.raises(ParameterError, match="fewer than 5"):
            verify_weighted_young(1.25, 1.25, 2, points=16)


class TestHeatEstimate:
    def test_unweighted_decay(self, lemma_grid):
        """Verify that the sup of the heat flow of |x|^{-3/2} decays like t^{-3/4}."""
        report = verify_heat_estimate(0.0, 1.5, lemma_grid, LEMMA_TIMES)
        assert report.passed, report
        assert report.fitted_slope == pytest.approx(-0.75, abs=0.05)

    def test_weighted_decay(self, lemma_grid):
        """Verify that the |x|^{1/2}-weighted sup decays like t^{-1/2}."""
        report = verify_heat_estimate(0.5, 1.5, lemma_grid, LEMMA_TIMES)
        assert report.passed, report
        assert report.fitted_slope == pytest.approx(-0.5, abs=0.05)

    def test_matching_weight_stays_bounded(self, lemma_grid):
        """Verify that with gamma = beta the weighted sup does not grow."""
        report = verify_heat_estimate(1.5, 1.5, lemma_grid, LEMMA_TIMES)
        assert report.passed, report
        assert report.target_slope == 0.0

    def test_sup_constant(self, lemma_grid):
        """Verify that the reported constant bounds t^{(beta-gamma)/2} times every sample."""
        report = verify_heat_estimate(0.0, 1.5, lemma_grid, LEMMA_TIMES, samples=5)
        assert all(v * t**0.75 <= report.sup_constant * (1 + 1e-12) for t, v in report.samples)

    def test_zero_amplitude(self, lemma_grid):
        """Verify that zero data gives a degenerate passing report."""
        report = verify_heat_estimate(0.0, 1.5, lemma_grid, LEMMA_TIMES, samples=5, amplitude=0.0)
        assert report.degenerate and report.passed

    @pytest.mark.parametrize(("gamma", "beta"), [(1.0, 0.5), (0.0, 2.0), (-0.1, 1.5)])
    def test_rejected_exponents(self, lemma_grid, gamma, beta):
        """Verify that exponents outside 0 <= gamma <= beta < d are rejected."""
        with pytest.raises(ParameterError):
            verify_heat_estimate(gamma, beta, lemma_grid, LEMMA_TIMES)

    def test_rejected_times(self, lemma_grid):
        """Verify that times beyond (L/6)^2 are rejected."""
        with pytest.raises(ParameterError, match="resolvable window"):
            verify_heat_estimate(0.0, 1.5, lemma_grid, (12.5, 200.0))

    def test_rate_is_matched_not_bounded(self, lemma_grid):
        """Verify that the heat estimate demands the rate itself and fails a wrong target on recompute."""
        report = verify_heat_estimate(0.0, 1.5, lemma_grid, LEMMA_TIMES)
        assert report.mode == DecayMode.EQUAL
        tampered = report.model_copy(update={"target_slope": -0.5})
        assert not tampered.recompute().passed


class TestOseenEstimate:
    def test_unweighted_decay(self, lemma_grid):
        """Verify that e^{t Delta} P div of a |x|^{-3/2} tensor decays like t^{-5/4}."""
        report = verify_oseen_estimate(0.0, 1.5, lemma_grid, LEMMA_TIMES)
        assert report.passed, report
        assert report.fitted_slope == pytest.approx(-1.25, abs=0.05)

    def test_weighted_decay(self, lemma_grid):
        """Verify the |x|-weighted bound t^{-3/4}."""
        report = verify_oseen_estimate(1.0, 1.5, lemma_grid, LEMMA_TIMES)
        assert report.passed, report
        assert report.target_slope == pytest.approx(-0.75)

    def test_tensor_envelope(self, grid2d):
        """Verify that only the off-diagonal entry carries the profile."""
        F = tensor_envelope(grid2d, 1.5, 1.0)
        assert np.all(F.values[0, 0] == 0) and np.all(F.values[1, 0] == 0) and np.all(F.values[1, 1] == 0)
        assert F.values[0, 1].min() > 0

    def test_zero_amplitude(self, lemma_grid):
        """Verify that a zero tensor gives a degenerate passing report."""
        report = verify_oseen_estimate(0.0, 1.5, lemma_grid, LEMMA_TIMES, samples=5, amplitude=0.0)
        assert report.degenerate and report.passed

    def test_rate_is_matched_not_bounded(self, lemma_grid):
        """Verify that the Oseen estimate demands the rate itself and fails a slower target on recompute."""
        report = verify_oseen_estimate(0.0, 1.5, lemma_grid, LEMMA_TIMES)
        assert report.mode == DecayMode.EQUAL
        tampered = report.model_copy(update={"target_slope": -0.75})
        assert not tampered.recompute().passed


class TestInitialEstimate:
    @pytest.fixture(scope="class")
    def vortex(self):
        grid = make_grid(2, 80.0, 256)
        return make_divfree_data(DataKind.VORTEX, 1.5, 1.0, grid, core_radius=1.25)

    @pytest.fixture
    def params(self):
        return ExponentSet(gamma=0.5, tilde_gamma=0.5, alpha=0.25, beta=1.5, tilde_beta=1.5)

    def test_running_sup_levels_off(self, vortex, params):
        """Verify that the normalized running sup shows no growth across the sampled decades."""
        report = verify_initial_estimate(vortex, params, geometric_times(2.0, 100.0, 10))
        assert report.passed, report
        values = [v for _, v in report.samples]
        assert values == sorted(values)
        assert report.sup_constant == pytest.approx(values[-1])

    def test_zero_data(self, params):
        """Verify that zero data gives a degenerate passing report."""
        grid = make_grid(2, 80.0, 256)
        zero = make_divfree_data(DataKind.VORTEX, 1.5, 0.0, grid, core_radius=1.25)
        report = verify_initial_estimate(zero, params, geometric_times(2.0, 100.0, 5))
        assert report.degenerate and report.passed

    def test_rejected_times(self, vortex, params):
        """Verify that times below h^2 are rejected."""
        with pytest.raises(ParameterError):
            verify_initial_estimate(vortex, params, geometric_times(0.1, 1.0, 5))


class TestSolutionDecay:
    def test_power_law_solution(self, decay_solution):
        """Verify all three parts on min(t^{-3/4}, |x|^{-3/2}) e_1."""
        report = verify_solution_decay(decay_solution, 0.5, 1.5)
        assert report.passed, report
        weight, temporal, spatial = report.parts
        assert weight.mode == DecayMode.STABLE
        assert temporal.fitted_slope == pytest.approx(-0.75, abs=1e-9)
        assert spatial.fitted_slope <= -1.4

    def test_zero_solution(self, decay_solution):
        """Verify that an identically zero solution passes as degenerate."""
        zero = SpaceTimeField.zeros(decay_solution.grid, decay_solution.times)
        report = verify_solution_decay(zero, 0.5, 1.5)
        assert report.passed and report.degenerate

    def test_slow_decay_fails(self, decay_solution):
        """Verify that a solution decaying like t^{-1/4} fails the temporal part."""
        slow = decay_solution.with_values(
            decay_solution.values * (decay_solution.times**0.5)[:, None, None, None]
        )
        report = verify_solution_decay(slow, 0.5, 1.5)
        assert not report.passed
        assert not report.parts[1].passed

    def test_requires_convergence(self, decay_solution):
        """Verify that a non-converged run is refused."""
        diagnostics = PicardDiagnostics(converged=False, iterations=5)
        with pytest.raises(ParameterError, match="converged"):
            verify_solution_decay(decay_solution, 0.5, 1.5, diagnostics)

    def test_rejected_exponents(self, decay_solution):
        """Verify that gamma above beta is rejected."""
        with pytest.raises(ParameterError):
            verify_solution_decay(decay_solution, 1.5, 1.0)


class TestBootstrap:
    def test_grid_norms_finite(self, decay_solution):
        """Verify that every norm on the default exponent grids is stable under cap doubling."""
        report = verify_bootstrap(decay_solution, 1.5, [0.0, 0.25, 0.5, 0.75, 1.0], [0.0, 0.5, 1.0, 1.5])
        assert report.passed, report
        assert len(report.parts) == 9
        assert report.parts[0].name == "bootstrap/K^1_0.0"
        assert report.name == "bootstrap(beta=1.5)"

    @pytest.mark.parametrize(("alphas", "hat_betas"), [([1.5], [0.5]), ([0.5], [2.0]), ([-0.1], [0.5])])
    def test_rejected_grids(self, decay_solution, alphas, hat_betas):
        """Verify that exponent grids outside their ranges are rejected."""
        with pytest.raises(ParameterError):
            verify_bootstrap(decay_solution, 1.5, alphas, hat_betas)

    def test_requires_convergence(self, decay_solution):
        """Verify that bootstrap refuses a non-converged run."""
        with pytest.raises(ParameterError):
            verify_bootstrap(decay_solution, 1.5, [0.5], [0.5], PicardDiagnostics(converged=False))
