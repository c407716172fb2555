"""Numerical checks of the weighted convolution, heat and Oseen estimates."""

import math

import numpy as np
from loguru import logger
from scipy import integrate, signal

from src.analysis.models import DecayMode, DecayReport, ExponentSet, geometric_times
from src.analysis.weighted import smallness_terms, weighted_sup_norm
from src.errors import ParameterError
from src.fields.grid import GridSpec, make_grid
from src.fields.models import ScalarField, TensorField, VectorField
from src.fields.profiles import regularized_powerlaw
from src.kernels.operators import heat_apply, oseen_apply

FLATNESS_TOLERANCE = 0.15
EXPONENT_TOLERANCE = 0.1
LINEAR_TOLERANCE = 0.05


def powerlaw_profile(grid: GridSpec, beta: float, eps: float, mass_matched: bool = True) -> ScalarField:
    """Band-limited stand-in (eps^2 + |x|^2)^{-beta/2} for |x|^{-beta}."""
    values = regularized_powerlaw(np.broadcast_to(grid.radius(), grid.shape), beta, eps, grid.dimension, mass_matched)
    return ScalarField(grid=grid, values=values)


# --- Weighted Young inequality ---


def outside_box_integral(p: float, half_widths: list[float]) -> float:
    """int over R^d outside the box prod [-a_i, a_i] of |y|^{-p}, p > d."""
    d = len(half_widths)
    if not p > d:
        raise ParameterError(f"outer integral needs p > d, got p={p}, d={d}")
    a = np.asarray(half_widths, dtype=float)

    def exit_radius(omega: np.ndarray) -> float:
        with np.errstate(divide="ignore"):
            return float(np.min(np.where(omega > 0, a / np.where(omega > 0, omega, 1.0), np.inf)))

    def shell(omega: np.ndarray) -> float:
        return exit_radius(omega) ** (d - p) / (p - d)

    if d == 2:
        corner = math.atan2(a[1], a[0])
        value, _ = integrate.quad(
            lambda th: shell(np.array([math.cos(th), math.sin(th)])), 0.0, math.pi / 2, points=[corner], limit=200
        )
        return 4.0 * value
    value, _ = integrate.dblquad(
        lambda th, ph: shell(np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)]))
        * math.sin(th),
        0.0,
        math.pi / 2,
        0.0,
        math.pi / 2,
    )
    return 8.0 * value


def young_ratio_profile(
    f: ScalarField,
    g: ScalarField,
    alpha: float,
    beta: float,
    radii,
    far_field: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(|x|, (f*g)(x), |x|^{alpha+beta-d} (f*g)(x) / (|f|_alpha |g|_beta)) along the first axis.

    The convolution is a zero-padded lattice sum; the part of R^d the box
    misses is added analytically for the far field ``far_field`` |y|^{-(alpha+beta)}.
    Output points are lattice offsets m h, the nearest to each requested radius.
    """
    f.require_same_grid(g)
    grid = f.grid
    d, h, L = grid.dimension, grid.spacing, grid.half_width
    full = signal.fftconvolve(f.values, g.values, mode="full") * h**d
    centre = grid.points_per_axis - 1

    offsets = sorted({int(round(r / h)) for r in np.asarray(radii, dtype=float)})
    offsets = [m for m in offsets if m > 0]
    positions = np.array([m * h for m in offsets])
    conv = np.empty(positions.size)
    for i, (m, x) in enumerate(zip(offsets, positions)):
        index = (centre + m,) + (centre,) * (d - 1)
        tail = 0.0
        if far_field != 0:
            tail = far_field * outside_box_integral(alpha + beta, [L - x / 2.0] + [L] * (d - 1))
        conv[i] = full[index] + tail

    norms = weighted_sup_norm(f, alpha) * weighted_sup_norm(g, beta)
    ratios = np.zeros_like(conv) if norms == 0 else positions ** (alpha + beta - d) * conv / norms
    return positions, conv, ratios


def verify_weighted_young(
    alpha: float,
    beta: float,
    d: int,
    points: int = 512,
    half_width: float = 32.0,
    regularization_factor: float = 2.0,
    mass_matched: bool = True,
) -> DecayReport:
    """Bounded, flat |x|^{alpha+beta-d} (f*g)/(|f|_alpha |g|_beta) on half-octave radii in [4 eps, L/4]."""
    if not (0 < alpha < d and 0 < beta < d and alpha + beta > d):
        raise ParameterError(f"need 0 < alpha, beta < {d} < alpha + beta, got alpha={alpha}, beta={beta}")
    grid = make_grid(d, half_width, points)
    eps = regularization_factor * grid.spacing
    lo, hi = 4.0 * eps, half_width / 4.0
    radii = [2.0 ** (j / 2.0) for j in range(-12, 40) if lo <= 2.0 ** (j / 2.0) <= hi]
    if len(radii) < 5:
        raise ParameterError(f"dyadic window [{lo:.3g}, {hi:.3g}] holds fewer than 5 radii at this resolution")

    logger.info(f"Weighted Young check alpha={alpha}, beta={beta}, d={d}, N={points}")
    f = powerlaw_profile(grid, alpha, eps, mass_matched)
    g = powerlaw_profile(grid, beta, eps, mass_matched)
    positions, conv, ratios = young_ratio_profile(f, g, alpha, beta, radii)
    # few half-octave radii; fit all of them
    window = (float(positions.min()), float(positions.max()))

    name = f"weighted_young(alpha={alpha},beta={beta},d={d})"
    flatness = DecayReport.from_series(
        f"{name}/ratio",
        DecayMode.FLAT,
        list(zip(positions, ratios)),
        tolerance=FLATNESS_TOLERANCE,
        window=window,
        axis="r",
        sup_constant=float(np.max(ratios)),
    )
    exponent = DecayReport.from_series(
        f"{name}/convolution",
        DecayMode.EQUAL,
        list(zip(positions, conv)),
        tolerance=EXPONENT_TOLERANCE,
        target_slope=-(alpha + beta - d),
        window=window,
        axis="r",
    )
    return DecayReport.combine(name, [flatness, exponent], sup_constant=float(np.max(ratios)))


# --- Heat and Oseen estimates ---


def _lemma_times(grid: GridSpec, time_range: tuple[float, float], samples: int) -> np.ndarray:
    t_lo, t_hi = grid.resolvable_times()
    lo, hi = time_range
    if lo < t_lo * (1 - 1e-12) or hi > t_hi * (1 + 1e-12):
        raise ParameterError(f"time range [{lo}, {hi}] leaves the resolvable window [{t_lo:.4g}, {t_hi:.4g}]")
    return geometric_times(lo, hi, samples)


def _check_lemma_exponents(gamma: float, beta: float, d: int) -> None:
    if not 0 <= gamma <= beta < d:
        raise ParameterError(f"need 0 <= gamma <= beta < {d}, got gamma={gamma}, beta={beta}")


def verify_heat_estimate(
    gamma: float,
    beta: float,
    grid: GridSpec,
    time_range: tuple[float, float],
    samples: int = 10,
    regularization_factor: float = 2.0,
    mass_matched: bool = True,
    amplitude: float = 1.0,
) -> DecayReport:
    """Slope of log |e^{t Delta} f|_{L^inf(|x|^gamma)} against log t; equals -(beta - gamma)/2 for the power law."""
    _check_lemma_exponents(gamma, beta, grid.dimension)
    times = _lemma_times(grid, time_range, samples)
    f = amplitude * powerlaw_profile(grid, beta, regularization_factor * grid.spacing, mass_matched)
    r_max = grid.half_width / 2.0
    series = [(t, weighted_sup_norm(heat_apply(f, t), gamma, r_max)) for t in times]
    return DecayReport.from_series(
        f"heat_estimate(gamma={gamma},beta={beta})",
        DecayMode.EQUAL,
        series,
        tolerance=LINEAR_TOLERANCE,
        target_slope=-(beta - gamma) / 2.0,
        sup_constant=max(v * t ** ((beta - gamma) / 2.0) for t, v in series),
    )


def tensor_envelope(grid: GridSpec, beta: float, eps: float, mass_matched: bool = True, amplitude: float = 1.0):
    """Tensor with the power-law envelope in its (1, 2) entry and zeros elsewhere."""
    values = np.zeros((grid.dimension, grid.dimension) + grid.shape)
    values[0, 1] = amplitude * powerlaw_profile(grid, beta, eps, mass_matched).values
    return TensorField(grid=grid, values=values)


def verify_oseen_estimate(
    gamma: float,
    beta: float,
    grid: GridSpec,
    time_range: tuple[float, float],
    samples: int = 10,
    regularization_factor: float = 2.0,
    mass_matched: bool = True,
    amplitude: float = 1.0,
) -> DecayReport:
    """Same pipeline as the heat estimate with e^{t Delta} P div; rate -(beta + 1 - gamma)/2."""
    _check_lemma_exponents(gamma, beta, grid.dimension)
    times = _lemma_times(grid, time_range, samples)
    F = tensor_envelope(grid, beta, regularization_factor * grid.spacing, mass_matched, amplitude)
    r_max = grid.half_width / 2.0
    series = [(t, weighted_sup_norm(oseen_apply(F, t), gamma, r_max)) for t in times]
    return DecayReport.from_series(
        f"oseen_estimate(gamma={gamma},beta={beta})",
        DecayMode.EQUAL,
        series,
        tolerance=LINEAR_TOLERANCE,
        target_slope=-(beta + 1.0 - gamma) / 2.0,
        sup_constant=max(v * t ** ((beta + 1.0 - gamma) / 2.0) for t, v in series),
    )


# --- Initial-data estimate ---


def verify_initial_estimate(
    f: VectorField,
    params: ExponentSet,
    times: np.ndarray,
    r_max: float | None = None,
) -> DecayReport:
    """Running sup over t <= T of the three-term weighted |e^{t Delta} f|, divided by |f|_gamma + |f|_beta.

    The estimate holds with a T-independent constant, so the running sup must
    level off: no growth trend across the sampled decades.
    """
    grid = f.grid
    r_max = grid.half_width / 2.0 if r_max is None else r_max
    times = np.asarray(times, dtype=float)
    t_lo, t_hi = grid.resolvable_times()
    if times.min() < t_lo * (1 - 1e-12) or times.max() > t_hi * (1 + 1e-12):
        raise ParameterError("sample times leave the resolvable window")

    radius = np.broadcast_to(grid.radius(), grid.shape)
    inside = radius <= r_max
    rhs = weighted_sup_norm(f, params.gamma, r_max) + weighted_sup_norm(f, params.beta, r_max)
    terms = smallness_terms(params, "three_term")

    running, series = 0.0, []
    for t in times:
        magnitude = heat_apply(f, t).magnitude()
        weight = sum((radius**a if a else 1.0) * t**b for a, b in terms)
        running = max(running, float(np.max((weight * magnitude)[inside])))
        series.append((t, 0.0 if rhs == 0 else running / rhs))

    return DecayReport.from_series(
        "initial_estimate",
        DecayMode.FLAT,
        series,
        tolerance=FLATNESS_TOLERANCE,
        sup_constant=max(v for _, v in series),
    )
