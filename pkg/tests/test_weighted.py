"""Tests for weighted norms, K-norms and exponent fits."""

import numpy as np
import pytest

from src.analysis.fitting import default_window, fit_decay_exponent
from src.analysis.models import DecayMode, DecayReport, ExponentSet, SpaceTimeField, WeightParams, geometric_times
from src.analysis.weighted import (
    combined_weight_sup,
    intersection_norm,
    k_norm,
    radial_envelope,
    smallness_functional,
    smallness_terms,
    weighted_sup_norm,
)
from src.errors import FitError, ParameterError
from src.fields.models import ScalarField


def _random_flow(grid, rng, slices=5):
    times = geometric_times(0.5, 2.0, slices)
    values = rng.normal(size=(slices, grid.dimension) + grid.shape)
    return SpaceTimeField(grid=grid, times=times, values=values)


class TestWeightedNorms:
    def test_power_law_has_unit_norm(self, grid2d):
        """Verify that |x|^{-beta} sampled on the grid has weighted norm 1."""
        f = ScalarField(grid=grid2d, values=np.broadcast_to(grid2d.radius(), grid2d.shape) ** -1.5)
        assert weighted_sup_norm(f, 1.5) == pytest.approx(1.0)

    def test_radius_cap(self, grid2d):
        """Verify that r_max restricts the sampled nodes and rejects an empty region."""
        f = ScalarField(grid=grid2d, values=np.broadcast_to(grid2d.radius(), grid2d.shape).copy())
        assert weighted_sup_norm(f, 0.0, r_max=2.0) <= 2.0
        with pytest.raises(ParameterError):
            weighted_sup_norm(f, 0.0, r_max=0.1)

    def test_negative_exponent(self, grid2d):
        """Verify that negative weights are rejected."""
        with pytest.raises(ParameterError):
            weighted_sup_norm(ScalarField.zeros(grid2d), -1.0)

    def test_k_norm_of_constant_field(self, grid2d):
        """Verify that a constant c gives k_norm(u, 0, beta, T) = c T^{beta/2}."""
        times = geometric_times(0.5, 2.0, 4)
        u = SpaceTimeField(grid=grid2d, times=times, values=np.full((4, 2) + grid2d.shape, 3.0 / np.sqrt(2)))
        assert k_norm(u, 0.0, 1.0, T=2.0) == pytest.approx(3.0 * np.sqrt(2.0))
        assert k_norm(u, 0.0, 1.0, T=1.0) == pytest.approx(3.0 * np.sqrt(times[times <= 1.0][-1]))

    def test_k_norm_exponent_order(self, grid2d, rng):
        """Verify that k_norm requires 0 <= alpha <= beta."""
        u = _random_flow(grid2d, rng)
        with pytest.raises(ParameterError):
            k_norm(u, 1.0, 0.5)
        with pytest.raises(ParameterError):
            k_norm(u, 0.0, 1.0, T=0.1)

    @pytest.mark.parametrize("alpha, beta, wider", [(0.25, 1.0, 1.5), (0.0, 0.5, 1.0), (1.0, 1.0, 2.0)])
    def test_embedding_on_finite_horizon(self, grid2d, rng, alpha, beta, wider):
        """Verify k_norm(u, a, b', T) <= T^{(b'-b)/2} k_norm(u, a, b, T) for b <= b'."""
        u = _random_flow(grid2d, rng)
        T = float(u.times[-1])
        lhs = k_norm(u, alpha, wider, T)
        rhs = T ** ((wider - beta) / 2.0) * k_norm(u, alpha, beta, T)
        assert lhs <= rhs * (1 + 1e-12)

    def test_intersection_norm_is_the_larger_norm(self, grid2d, rng):
        """Verify the intersection norm is the max of its two K-norms."""
        u = _random_flow(grid2d, rng)
        expected = max(k_norm(u, 0.25, 1.0), k_norm(u, 1.5, 1.5))
        assert intersection_norm(u, 0.25, 1.5, 1.5, None, None) == pytest.approx(expected)

    def test_smallness_variants_are_ordered(self, grid2d, rng, weight_params):
        """Verify that dropping nonnegative weight terms never increases the functional."""
        flow = _random_flow(grid2d, rng)
        three = smallness_functional(flow, weight_params, "three_term")
        two = smallness_functional(flow, weight_params, "two_term")
        one = smallness_functional(flow, weight_params, "single_term")
        assert three >= two >= one > 0

    def test_two_term_is_the_intersection_norm(self, grid2d, rng, weight_params):
        """Verify that the two-term functional is the intersection norm of K^1_alpha and K^beta_tilde_beta."""
        flow = _random_flow(grid2d, rng)
        p = weight_params
        expected = intersection_norm(flow, p.alpha, p.beta, p.tilde_beta, None, 4.0)
        assert smallness_functional(flow, p, "two_term", r_max=4.0) == expected

    def test_k_norm_grows_with_horizon(self, grid2d, rng):
        """Verify that k_norm(u, alpha, beta, T) is nondecreasing in T."""
        u = _random_flow(grid2d, rng, slices=6)
        norms = [k_norm(u, 0.25, 1.0, T=float(t)) for t in u.times]
        assert all(a <= b for a, b in zip(norms, norms[1:]))
        assert norms[-1] == k_norm(u, 0.25, 1.0)

    @pytest.mark.parametrize("c", [-4.0, 0.5, 2.0])
    def test_weighted_norm_is_homogeneous(self, grid2d, rng, c):
        """Verify |c f|_beta = |c| |f|_beta exactly up to round-off."""
        f = ScalarField(grid=grid2d, values=rng.normal(size=grid2d.shape))
        assert weighted_sup_norm(f * c, 1.5) == pytest.approx(abs(c) * weighted_sup_norm(f, 1.5), rel=1e-14)

    def test_unknown_smallness_variant(self, weight_params):
        """Verify that an unknown variant name is rejected."""
        with pytest.raises(ParameterError):
            smallness_terms(weight_params, "four_term")

    def test_combined_weight_order(self, grid2d, rng):
        """Verify that combined_weight_sup requires gamma <= beta."""
        with pytest.raises(ParameterError):
            combined_weight_sup(_random_flow(grid2d, rng), 1.0, 0.5)

    def test_radial_envelope_of_decaying_profile(self, grid2d):
        """Verify that the envelope of 1/|x| decreases and empty annuli are dropped."""
        f = ScalarField(grid=grid2d, values=1.0 / np.broadcast_to(grid2d.radius(), grid2d.shape))
        centres, maxima = radial_envelope(f, np.geomspace(1.0, 7.0, 8))
        assert centres.size == maxima.size > 0
        assert np.all(np.diff(maxima) < 0)
        with pytest.raises(ParameterError):
            radial_envelope(f, [2.0, 1.0])


class TestExponentSets:
    def test_initial_ranges(self):
        """Verify the ranges of the initial-data estimate."""
        with pytest.raises(ValueError):
            ExponentSet(gamma=0.5, tilde_gamma=0.75, alpha=0.25, beta=1.5, tilde_beta=1.5)

    def test_existence_ranges(self):
        """Verify that alpha must stay below d - tilde_beta."""
        with pytest.raises(ValueError):
            WeightParams(gamma=0.5, tilde_gamma=0.5, alpha=0.5, beta=1.5, tilde_beta=1.5)

    def test_geometric_times(self):
        """Verify the endpoints and the constant ratio of the time grid."""
        times = geometric_times(0.1, 10.0, 5)
        assert times[0] == pytest.approx(0.1)
        assert times[-1] == pytest.approx(10.0)
        assert np.allclose(times[1:] / times[:-1], 10.0**0.5)


class TestFitting:
    def test_exact_power_law(self):
        """Verify that an exact power law is recovered with R^2 = 1."""
        samples = [(t, 2.0 * t**-0.75) for t in geometric_times(0.1, 10.0, 9)]
        fit = fit_decay_exponent(samples)
        assert fit.slope == pytest.approx(-0.75)
        assert fit.intercept == pytest.approx(np.log(2.0))
        assert fit.r_squared == pytest.approx(1.0)

    def test_constant_series(self):
        """Verify that a series without variance has slope 0."""
        assert fit_decay_exponent([(t, 3.0) for t in range(1, 7)]).slope == 0.0

    @pytest.mark.parametrize(
        "samples",
        [[(1.0, 1.0)] * 4, [(t, -1.0) for t in range(1, 7)], [(1.0, float(v)) for v in range(1, 7)]],
    )
    def test_unusable_samples(self, samples):
        """Verify that too few, nonpositive or single-abscissa samples raise FitError."""
        with pytest.raises(FitError):
            fit_decay_exponent(samples)

    def test_window_selects_samples(self):
        """Verify that samples outside the window are ignored."""
        samples = [(t, t**-1.0) for t in geometric_times(0.1, 10.0, 9)] + [(100.0, 1.0)]
        assert fit_decay_exponent(samples, window=(0.1, 10.0)).slope == pytest.approx(-1.0)

    def test_default_window_trims_log_edges(self):
        """Verify that the default window drops 20% of the log range at each end."""
        lo, hi = default_window([1.0, 1e5])
        assert lo == pytest.approx(10.0)
        assert hi == pytest.approx(1e4)

    def test_rescaling_shifts_only_the_intercept(self):
        """Verify that multiplying the values by c keeps the slope and shifts the intercept by log c."""
        rng = np.random.default_rng(2)
        times = geometric_times(1.0, 50.0, 10)
        samples = [(t, t**-0.6 * np.exp(0.05 * rng.normal())) for t in times]
        base = fit_decay_exponent(samples)
        for c in (1e-3, 7.0):
            scaled = fit_decay_exponent([(t, c * v) for t, v in samples])
            assert scaled.slope == pytest.approx(base.slope, abs=1e-10)
            assert scaled.intercept == pytest.approx(base.intercept + np.log(c), abs=1e-10)


class TestDecayReport:
    samples = [(t, t**-0.75) for t in geometric_times(1.0, 100.0, 12)]

    def test_modes(self):
        """Verify the equal, upper-bound, no-growth and flat verdicts."""
        equal = DecayReport.from_series("e", DecayMode.EQUAL, self.samples, tolerance=0.05, target_slope=-0.75)
        upper = DecayReport.from_series("u", DecayMode.UPPER_BOUND, self.samples, tolerance=0.05, target_slope=-0.5)
        wrong = DecayReport.from_series("w", DecayMode.EQUAL, self.samples, tolerance=0.05, target_slope=-0.5)
        no_growth = DecayReport.from_series("n", DecayMode.NO_GROWTH, self.samples, tolerance=0.15)
        flat = DecayReport.from_series("f", DecayMode.FLAT, self.samples, tolerance=0.15)
        assert equal.passed and upper.passed and no_growth.passed
        assert not wrong.passed
        assert not flat.passed
        assert equal.fitted_slope == pytest.approx(-0.75)

    def test_stable_mode(self):
        """Verify that stability compares the last sample with the first."""
        stable = DecayReport.from_series("s", DecayMode.STABLE, [(8.0, 1.0), (16.0, 1.05)], tolerance=0.1)
        moving = DecayReport.from_series("m", DecayMode.STABLE, [(8.0, 1.0), (16.0, 1.5)], tolerance=0.1)
        assert stable.passed and stable.fitted_slope == pytest.approx(0.05)
        assert not moving.passed

    def test_all_zero_series_is_degenerate(self):
        """Verify that an all-zero series passes vacuously and is flagged."""
        report = DecayReport.from_series("z", DecayMode.EQUAL, [(t, 0.0) for t in range(1, 4)], tolerance=0.05)
        assert report.passed and report.degenerate

    def test_unfittable_series_fails_with_note(self):
        """Verify that a FitError turns into a failed report with a note."""
        report = DecayReport.from_series("short", DecayMode.FLAT, self.samples[:3], tolerance=0.15)
        assert not report.passed
        assert "at least" in report.note

    def test_verdict_is_recomputable_from_json(self):
        """Verify that a serialized report re-derives the same verdict."""
        part = DecayReport.from_series("e", DecayMode.EQUAL, self.samples, tolerance=0.05, target_slope=-0.75)
        combined = DecayReport.combine("c", [part])
        restored = DecayReport.model_validate_json(combined.model_dump_json())
        tampered = restored.model_copy(update={"passed": False})
        assert tampered.recompute().passed
        assert tampered.recompute().parts[0].fitted_slope == pytest.approx(-0.75)

    def test_combined_verdict(self):
        """Verify that a combined report passes iff every part passes."""
        good = DecayReport.from_series("g", DecayMode.NO_GROWTH, self.samples, tolerance=0.15)
        bad = DecayReport.from_series("b", DecayMode.FLAT, self.samples, tolerance=0.15)
        assert DecayReport.combine("ok", [good]).passed
        assert not DecayReport.combine("mixed", [good, bad]).passed

    def test_default_window_is_stored(self):
        """Verify that a report without a window fits inside the default one and records it."""
        report = DecayReport.from_series("d", DecayMode.EQUAL, self.samples, tolerance=0.05, target_slope=-0.75)
        assert report.window == pytest.approx(default_window([t for t, _ in self.samples]))
        assert report.window[0] > self.samples[0][0]
        assert report.window[1] < self.samples[-1][0]

    def test_explicit_window_is_kept(self):
        """Verify that an explicit window overrides the default one."""
        window = (self.samples[0][0], self.samples[-1][0])
        report = DecayReport.from_series("x", DecayMode.FLAT, self.samples, tolerance=0.15, window=window)
        assert report.window == window

    def test_r_squared_waiver_is_flagged(self):
        """Verify that a target within the tolerance of 0 skips the R^2 gate and says so."""
        rng = np.random.default_rng(4)
        noisy = [(t, 1.0 + 0.05 * rng.normal()) for t, _ in self.samples]
        flat_target = DecayReport.from_series("z", DecayMode.EQUAL, noisy, tolerance=0.1, target_slope=0.0)
        power_law = DecayReport.from_series("p", DecayMode.EQUAL, self.samples, tolerance=0.05, target_slope=-0.75)
        assert flat_target.r_squared_waived
        assert flat_target.passed
        assert not power_law.r_squared_waived
        assert "r_squared_waived" in flat_target.model_dump()

    def test_waiver_follows_a_tampered_target(self):
        """Verify that recompute re-derives the waiver from the stored target."""
        report = DecayReport.from_series("p", DecayMode.EQUAL, self.samples, tolerance=0.05, target_slope=-0.75)
        tampered = report.model_copy(update={"target_slope": 0.0, "tolerance": 1.0})
        assert tampered.recompute().r_squared_waived
