"""Tests for the Beta-function time integrals and the Young reference constant."""

import math

import pytest

from src.errors import ParameterError
from src.verify.integrals import (
    BETA_TOLERANCE,
    IntegralPart,
    beta_integral_check,
    beta_time_integral,
    draw_exponents,
    incomplete_beta,
    young_reference_constant,
)
from src.verify.models import ReferenceCheck


class TestBetaIntegrals:
    @pytest.mark.parametrize(
        ("gamma", "theta", "t", "part", "expected"),
        [
            (0.0, 0.0, 2.0, IntegralPart.FULL, 2.0),
            (0.0, 0.0, 8.0, IntegralPart.FIRST_HALF, 4.0),
            (0.5, 0.5, 3.0, IntegralPart.FULL, math.pi),
            (0.5, 0.5, 1.0, IntegralPart.SECOND_HALF, math.pi / 2.0),
        ],
    )
    def test_known_values(self, gamma, theta, t, part, expected):
        """Verify that numeric and closed forms agree with hand-computed integrals."""
        numeric, closed = beta_time_integral(gamma, theta, t, part)
        assert numeric == pytest.approx(expected, rel=1e-10)
        assert closed == pytest.approx(expected, rel=1e-10)

    def test_halves_add_up(self):
        """Verify that the two halves sum to the full integral."""
        first, _ = beta_time_integral(0.3, 0.6, 1.7, IntegralPart.FIRST_HALF)
        second, _ = beta_time_integral(0.3, 0.6, 1.7, IntegralPart.SECOND_HALF)
        full, _ = beta_time_integral(0.3, 0.6, 1.7, IntegralPart.FULL)
        assert first + second == pytest.approx(full, rel=1e-10)

    def test_incomplete_beta_endpoint(self):
        """Verify that the incomplete Beta function of (1, 1) at x is x."""
        assert incomplete_beta(1.0, 1.0, 0.3) == pytest.approx(0.3, rel=1e-14)

    @pytest.mark.parametrize(
        ("gamma", "theta", "t", "part"),
        [
            (0.5, 1.0, 1.0, IntegralPart.FULL),
            (1.0, 0.5, 1.0, IntegralPart.FULL),
            (0.5, 1.2, 1.0, IntegralPart.FIRST_HALF),
            (1.2, 0.5, 1.0, IntegralPart.SECOND_HALF),
            (0.5, 0.5, 0.0, IntegralPart.FULL),
        ],
    )
    def test_preconditions(self, gamma, theta, t, part):
        """Verify that divergent integrals and nonpositive times are rejected."""
        with pytest.raises(ParameterError):
            beta_time_integral(gamma, theta, t, part)

    def test_free_exponent_allowed(self):
        """Verify that the first half tolerates gamma >= 1 and the second half theta >= 1."""
        numeric, closed = beta_time_integral(1.5, 0.5, 1.0, IntegralPart.FIRST_HALF)
        assert numeric == pytest.approx(closed, rel=BETA_TOLERANCE)
        numeric, closed = beta_time_integral(0.5, 1.5, 1.0, "second-half")
        assert numeric == pytest.approx(closed, rel=BETA_TOLERANCE)

    @pytest.mark.parametrize("part", list(IntegralPart))
    @pytest.mark.parametrize("t", [0.5, 1.0, 7.0])
    def test_random_draws(self, rng, part, t):
        """Verify the closed forms on 20 seeded exponent draws per part and time."""
        for _ in range(20):
            gamma, theta = draw_exponents(part, rng)
            check = beta_integral_check(gamma, theta, t, part)
            assert check.passed, check
            assert check.relative_error <= 1e-8

    def test_draws_stay_admissible(self, rng):
        """Verify that drawn exponents respect each part's convergence condition."""
        for _ in range(200):
            gamma, theta = draw_exponents(IntegralPart.FULL, rng)
            assert gamma < 1 and theta < 1
            _, theta = draw_exponents(IntegralPart.FIRST_HALF, rng)
            assert theta < 1
            gamma, _ = draw_exponents(IntegralPart.SECOND_HALF, rng)
            assert gamma < 1


class TestYoungConstant:
    def test_symmetric_pair(self):
        """Verify the quadrature of the one-dimensional Young constant against its Beta closed form."""
        numeric, closed = young_reference_constant(0.75, 0.75)
        assert numeric == pytest.approx(closed, rel=1e-6)

    def test_asymmetric_pair(self):
        """Verify the constant for an asymmetric admissible pair."""
        numeric, closed = young_reference_constant(0.6, 0.9)
        assert numeric == pytest.approx(closed, rel=1e-6)

    @pytest.mark.parametrize(("a", "b"), [(0.4, 0.5), (1.0, 0.5), (0.0, 0.5)])
    def test_inadmissible(self, a, b):
        """Verify that exponents outside 0 < a, b < 1 < a + b are rejected."""
        with pytest.raises(ParameterError):
            young_reference_constant(a, b)


class TestReferenceCheck:
    def test_compare(self):
        """Verify the relative error and verdict of a reference comparison."""
        check = ReferenceCheck.compare("x", {"a": 1.0}, 1.0 + 1e-9, 1.0, 1e-8)
        assert check.relative_error == pytest.approx(1e-9, rel=1e-6)
        assert check.passed

        check = ReferenceCheck.compare("x", {"a": 1.0}, 1.1, 1.0, 1e-8)
        assert not check.passed

    def test_zero_closed_form(self):
        """Verify that a zero closed form is matched only by a zero numeric value."""
        assert ReferenceCheck.compare("zero", {}, 0.0, 0.0, 1e-8).passed
        assert not ReferenceCheck.compare("zero", {}, 1e-6, 0.0, 1e-8).passed
