"""Divergence-free initial data and its heat flow."""

import enum

import numpy as np
from loguru import logger

from src.analysis.models import ExponentSet, SpaceTimeField
from src.analysis.weighted import SmallnessVariant, smallness_functional
from src.config import RunConfig
from src.errors import ParameterError
from src.fields.grid import GridSpec
from src.fields.models import ScalarField, VectorField
from src.fields.profiles import TAPER_START, regularized_powerlaw, smooth_taper
from src.fields.spectral import curl, forward, inverse, perp_gradient
from src.kernels.operators import heat_multiplier

RANDOM_VORTICES = 3


class DataKind(str, enum.Enum):
    VORTEX = "vortex"
    CURL_POTENTIAL = "curl-potential"


def _potential(radius: np.ndarray, beta: float, amplitude: float, core_radius: float, d: int, mass_matched: bool):
    """Radial stream function whose gradient decays like |x|^{-beta}."""
    p = beta - 1.0
    if p == 0:
        return -0.5 * amplitude * np.log(core_radius**2 + radius**2)
    if mass_matched and not d - 2 < p < d:
        logger.warning(f"No finite core mass for potential exponent {p} in d={d}; core left unmatched")
        mass_matched = False
    return amplitude * regularized_powerlaw(radius, p, core_radius, d, mass_matched)


def _velocity_from_potential(psi: np.ndarray, grid: GridSpec) -> VectorField:
    if grid.dimension == 2:
        return perp_gradient(ScalarField(grid=grid, values=psi))
    potential = np.zeros((3,) + grid.shape)
    potential[2] = psi
    return curl(VectorField(grid=grid, values=potential))


def make_divfree_data(
    kind: DataKind | str,
    beta: float,
    amplitude: float,
    grid: GridSpec,
    core_radius: float = 1.0,
    mass_matched: bool = False,
) -> VectorField:
    """Velocity u0 = perp grad psi (d = 2) or curl (0, 0, psi) (d = 3) with |u0| ~ |x|^{-beta}.

    ``vortex`` centres one radial potential at the origin; ``curl-potential``
    places two equal vortices at +-2 r_c along the first axis, so the field is
    not radial and its nonlinearity is not a pure gradient.  Beyond 0.7 L the
    potential is flattened to its value on that sphere, so the taper adds no
    velocity of its own at leading order.
    """
    kind = DataKind(kind)
    d = grid.dimension
    if not 1 <= beta < d:
        raise ParameterError(f"decay exponent must satisfy 1 <= beta < {d}, got {beta}")
    if amplitude < 0:
        raise ParameterError("amplitude must be nonnegative")
    if core_radius < 2.0 * grid.spacing:
        raise ParameterError(f"envelope unresolvable: core radius {core_radius} is below 2h = {2 * grid.spacing}")
    if amplitude == 0:
        return VectorField.zeros(grid)

    coords = grid.coordinates()
    if kind == DataKind.VORTEX:
        centres = [np.zeros(d)]
    else:
        offset = np.zeros(d)
        offset[0] = 2.0 * core_radius
        centres = [offset, -offset]

    rim_radius = np.array(TAPER_START * grid.half_width)
    psi = np.zeros(grid.shape)
    rim = 0.0
    for centre in centres:
        radius = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(coords, centre)))
        psi = psi + _potential(radius, beta, amplitude, core_radius, d, mass_matched)
        rim += float(_potential(rim_radius, beta, amplitude, core_radius, d, mass_matched))
    psi = rim + (psi - rim) * smooth_taper(grid.radius(), grid.half_width)
    logger.debug(f"Built {kind.value} data: beta={beta}, A={amplitude}, r_c={core_radius}, d={d}")
    return _velocity_from_potential(psi, grid)


def heat_flow(u0: VectorField, times: np.ndarray) -> SpaceTimeField:
    """e^{t Delta} u0 at every time, from a single forward transform."""
    grid = u0.grid
    coefficients = forward(u0.values, grid)
    slices = np.stack([inverse(heat_multiplier(grid, t) * coefficients, grid) for t in times])
    return SpaceTimeField(grid=grid, times=times, values=slices)


def _check_sample_times(grid: GridSpec, times: np.ndarray) -> None:
    t_lo, t_hi = grid.resolvable_times()
    if times.min() < t_lo * (1 - 1e-12) or times.max() > t_hi * (1 + 1e-12):
        raise ParameterError(f"sample times must lie in the resolvable window [{t_lo:.4g}, {t_hi:.4g}]")


def scale_to_smallness(
    u0: VectorField,
    params: ExponentSet,
    delta: float,
    times: np.ndarray,
    variant: SmallnessVariant = "three_term",
    r_max: float | None = None,
) -> tuple[VectorField, float]:
    """Rescale u0 so the sampled smallness sup of its heat flow sits just below delta."""
    if not delta > 0:
        raise ParameterError("target delta must be positive")
    times = np.asarray(times, dtype=float)
    _check_sample_times(u0.grid, times)
    current = smallness_functional(heat_flow(u0, times), params, variant, r_max=r_max)
    if current == 0:
        raise ParameterError("cannot scale zero initial data")
    factor = delta * (1.0 - 1e-6) / current
    logger.info(f"Scaling initial data by {factor:.6e} (sampled sup {current:.6e} -> {factor * current:.6e})")
    return u0 * factor, factor * current


def random_vortex_data(grid: GridSpec, rng: np.random.Generator) -> VectorField:
    """Smooth localized data: a few Gaussian vortices at random positions, widths and strengths."""
    h, L = grid.spacing, grid.half_width
    coords = grid.coordinates()
    psi = np.zeros(grid.shape)
    for _ in range(RANDOM_VORTICES):
        centre = rng.uniform(-L / 4.0, L / 4.0, size=grid.dimension)
        width = rng.uniform(max(2.0 * h, L / 32.0), L / 8.0)
        strength = rng.normal()
        r2 = sum((c - x0) ** 2 for c, x0 in zip(coords, centre))
        psi = psi + strength * np.exp(-r2 / (2.0 * width**2))
    return _velocity_from_potential(psi, grid)


def random_space_time_pair(
    times: np.ndarray, grid: GridSpec, rng: np.random.Generator
) -> tuple[SpaceTimeField, SpaceTimeField]:
    """Heat flows of two independent random vortex data sets."""
    first = heat_flow(random_vortex_data(grid, rng), times)
    second = heat_flow(random_vortex_data(grid, rng), times)
    return first, second


def support_radius(kind: DataKind | str, core_radius: float) -> float:
    """Radius R0 outside which the data is a far-field tail: r_c for a vortex, 3 r_c for the pair."""
    return core_radius if DataKind(kind) == DataKind.VORTEX else 3.0 * core_radius


def configured_core_radius(config: RunConfig, grid: GridSpec) -> float:
    """The [solver] core radius, defaulting to max(1, 2h)."""
    core_radius = config.solver.core_radius
    return core_radius if core_radius is not None else max(1.0, 2.0 * grid.spacing)


def data_from_config(config: RunConfig, grid: GridSpec) -> VectorField:
    """Initial data described by the [solver] and [weights] sections."""
    solver = config.solver
    core_radius = configured_core_radius(config, grid)
    return make_divfree_data(
        solver.data_kind,
        config.weights.beta,
        solver.amplitude,
        grid,
        core_radius=core_radius,
        mass_matched=config.verify.mass_matched,
    )
