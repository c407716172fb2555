"""Beta-function time integrals and the one-dimensional Young constant."""

import enum

import numpy as np
from scipy import integrate, special

from src.errors import ParameterError
from src.verify.models import ReferenceCheck

BETA_TOLERANCE = 1e-8
YOUNG_TOLERANCE = 1e-6


class IntegralPart(str, enum.Enum):
    FIRST_HALF = "first-half"
    SECOND_HALF = "second-half"
    FULL = "full"


def incomplete_beta(a: float, b: float, x: float) -> float:
    """int_0^x s^{a-1} (1-s)^{b-1} ds for a > 0, any b, 0 < x < 1."""
    return float(x**a / a * special.hyp2f1(a, 1.0 - b, a + 1.0, x))


def _quad(integrand, lo: float, hi: float, wvar: tuple[float, float]) -> float:
    value, _ = integrate.quad(integrand, lo, hi, weight="alg", wvar=wvar, epsabs=0.0, epsrel=1e-13, limit=200)
    return float(value)


def beta_time_integral(gamma: float, theta: float, t: float, part: IntegralPart | str) -> tuple[float, float]:
    """(numeric, closed form) of int (t - tau)^{-gamma} tau^{-theta} dtau over (0, t/2), (t/2, t) or (0, t).

    The numeric value comes from adaptive quadrature with the endpoint
    singularities carried by algebraic weights; the closed forms are
    t^{1-gamma-theta} times a complete or incomplete Beta function.
    """
    part = IntegralPart(part)
    if t <= 0:
        raise ParameterError(f"t must be positive, got {t}")
    if part in (IntegralPart.FIRST_HALF, IntegralPart.FULL) and not theta < 1:
        raise ParameterError(f"{part.value} integral needs theta < 1, got {theta}")
    if part in (IntegralPart.SECOND_HALF, IntegralPart.FULL) and not gamma < 1:
        raise ParameterError(f"{part.value} integral needs gamma < 1, got {gamma}")

    scale = t ** (1.0 - gamma - theta)
    if part == IntegralPart.FULL:
        numeric = _quad(lambda tau: 1.0, 0.0, t, (-theta, -gamma))
        closed = special.beta(1.0 - gamma, 1.0 - theta) * scale
    elif part == IntegralPart.FIRST_HALF:
        numeric = _quad(lambda tau: (t - tau) ** (-gamma), 0.0, t / 2.0, (-theta, 0.0))
        closed = incomplete_beta(1.0 - theta, 1.0 - gamma, 0.5) * scale
    else:
        numeric = _quad(lambda tau: tau ** (-theta), t / 2.0, t, (0.0, -gamma))
        closed = incomplete_beta(1.0 - gamma, 1.0 - theta, 0.5) * scale
    return numeric, float(closed)


def beta_integral_check(gamma: float, theta: float, t: float, part: IntegralPart | str) -> ReferenceCheck:
    part = IntegralPart(part)
    numeric, closed = beta_time_integral(gamma, theta, t, part)
    return ReferenceCheck.compare(
        f"beta-integral/{part.value}",
        {"gamma": gamma, "theta": theta, "t": t, "part": part.value},
        numeric,
        closed,
        BETA_TOLERANCE,
    )


def draw_exponents(part: IntegralPart, rng: np.random.Generator) -> tuple[float, float]:
    """Random (gamma, theta) inside the admissible region of ``part``."""
    admissible = (-0.5, 0.9)
    free = (-0.5, 2.0)
    gamma_range = free if part == IntegralPart.FIRST_HALF else admissible
    theta_range = free if part == IntegralPart.SECOND_HALF else admissible
    return float(rng.uniform(*gamma_range)), float(rng.uniform(*theta_range))


def young_reference_constant(a: float, b: float) -> tuple[float, float]:
    """(numeric, closed form) of int_R |1 - s|^{-a} |s|^{-b} ds, for 0 < a, b < 1 < a + b."""
    if not (0 < a < 1 and 0 < b < 1 and a + b > 1):
        raise ParameterError(f"need 0 < a, b < 1 < a + b, got a={a}, b={b}")

    def tail(s):
        return abs(1.0 - s) ** (-a) * abs(s) ** (-b)

    pieces = [
        integrate.quad(tail, -np.inf, -1.0, limit=200)[0],
        _quad(lambda s: (1.0 - s) ** (-a), -1.0, 0.0, (0.0, -b)),
        _quad(lambda s: 1.0, 0.0, 1.0, (-b, -a)),
        _quad(lambda s: s ** (-b), 1.0, 2.0, (-a, 0.0)),
        integrate.quad(tail, 2.0, np.inf, limit=200)[0],
    ]
    closed = (
        special.beta(1.0 - a, 1.0 - b)
        + special.beta(1.0 - a, a + b - 1.0)
        + special.beta(1.0 - b, a + b - 1.0)
    )
    return float(sum(pieces)), float(closed)
