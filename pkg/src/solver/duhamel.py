"""The Duhamel bilinear operator B(u, v)(t) = int_0^t e^{(t-tau) Delta} P div (u ⊗ v)(tau) dtau.

The integral is split into panels at the stored slice times below t, so the
piecewise-linear interpolant is smooth on every panel.  Each panel is
integrated in s = sqrt(t - tau), which absorbs the (t - tau)^{-1/2}
singularity of the Oseen operator on the last panel and resolves the
e^{-(t - tau)|k|^2} decay on the others; a panel (a, b) becomes
int_{sqrt(t-b)}^{sqrt(t-a)} 2 s (...) ds, integrated by Gauss-Legendre with q
nodes.  Below the first slice the first slice is held.
"""

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np
from loguru import logger

from src.analysis.models import SpaceTimeField, WeightParams
from src.analysis.weighted import k_norm
from src.config import settings
from src.errors import GridError, ParameterError
from src.fields.models import VectorField
from src.fields.spectral import forward, inverse
from src.kernels.operators import oseen_coefficients
from src.solver.data import random_space_time_pair
from src.solver.models import BilinearEstimate, SolverConfig

Bilinear = Callable[[SpaceTimeField, SpaceTimeField, SolverConfig], SpaceTimeField]


@lru_cache(maxsize=8)
def _legendre(q: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(q)


def quadrature_rule(t: float, q: int, knots=()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(tau, t - tau, weight) for the composite substituted rule with panel edges at ``knots``.

    Knots outside (0, t) are ignored; without knots the rule is a single
    panel of q nodes.
    """
    x, w = _legendre(q)
    inner = sorted({float(k) for k in knots if 0.0 < k < t * (1 - 1e-12)})
    edges = [0.0] + inner + [t]
    taus, lags, weights = [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        s_lo, s_hi = np.sqrt(t - b), np.sqrt(t - a)
        half = 0.5 * (s_hi - s_lo)
        s = s_lo + half * (x + 1.0)
        taus.append(t - s**2)
        lags.append(s**2)
        weights.append(half * w * 2.0 * s)
    return np.concatenate(taus), np.concatenate(lags), np.concatenate(weights)


def interpolate(u: SpaceTimeField, tau: float) -> np.ndarray:
    """u(tau) by linear interpolation in t; the first slice is held for tau below it."""
    times = u.times
    if tau <= times[0]:
        return u.values[0]
    if tau > times[-1] * (1 + 1e-12):
        raise ParameterError(f"tau = {tau} lies above the stored range ending at {times[-1]}")
    m = int(np.searchsorted(times, tau))
    if m >= len(times) or times[m] == tau:
        return u.values[min(m, len(times) - 1)]
    t0, t1 = times[m - 1], times[m]
    weight = (tau - t0) / (t1 - t0)
    return (1.0 - weight) * u.values[m - 1] + weight * u.values[m]


def _slice_index(u: SpaceTimeField, t: float) -> int:
    matches = np.flatnonzero(np.isclose(u.times, t, rtol=1e-12, atol=0.0))
    if matches.size == 0:
        raise ParameterError(f"t = {t} is not one of the slice times")
    return int(matches[0])


def _require_compatible(u: SpaceTimeField, v: SpaceTimeField) -> None:
    if u.grid.key != v.grid.key:
        raise GridError(f"grid mismatch: {u.grid.key} vs {v.grid.key}")
    if not np.array_equal(u.times, v.times):
        raise GridError("space-time fields have different time slices")


def _duhamel_values(u: SpaceTimeField, v: SpaceTimeField, t: float, q: int) -> np.ndarray:
    grid = u.grid
    total = np.zeros((grid.dimension,) + grid.shape, dtype=complex)
    for tau, lag, weight in zip(*quadrature_rule(t, q, knots=u.times)):
        product = np.einsum("i...,j...->ij...", interpolate(u, tau), interpolate(v, tau))
        total += weight * oseen_coefficients(forward(product, grid), grid, lag)
    return inverse(total, grid)


def duhamel_bilinear(u: SpaceTimeField, v: SpaceTimeField, t: float, cfg: SolverConfig) -> VectorField:
    """B(u, v) at the slice time t."""
    _require_compatible(u, v)
    _slice_index(u, t)
    return VectorField(grid=u.grid, values=_duhamel_values(u, v, t, cfg.quadrature_order))


def duhamel_all(u: SpaceTimeField, v: SpaceTimeField, cfg: SolverConfig) -> SpaceTimeField:
    """B(u, v) on every slice; slices are independent and run on ``settings.threads`` workers."""
    _require_compatible(u, v)
    q = cfg.quadrature_order

    def one(t: float) -> np.ndarray:
        return _duhamel_values(u, v, float(t), q)

    if settings.threads > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            slices = list(pool.map(one, u.times))
    else:
        slices = [one(t) for t in u.times]
    return u.with_values(np.stack(slices))


# --- Operator-norm sampling and calibration ---


def contraction_params(params: WeightParams) -> WeightParams:
    """Exponents for which B maps K^1_alpha x K^1_alpha into K^1_alpha: beta = 1, tilde_beta = hat_beta = alpha."""
    return WeightParams(
        gamma=min(params.gamma, 1.0),
        tilde_gamma=min(params.tilde_gamma, params.gamma, 1.0),
        alpha=params.alpha,
        beta=1.0,
        tilde_beta=params.alpha,
        hat_beta=params.alpha,
        dimension=params.dimension,
    )


def bilinear_ratio(
    u: SpaceTimeField,
    v: SpaceTimeField,
    params: WeightParams,
    cfg: SolverConfig,
    bilinear: Bilinear = duhamel_all,
) -> float:
    """||B(u,v)||_{K^beta_hat_beta} / (||u||_{K^1_alpha} ||v||_{K^beta_tilde_beta}) for one pair."""
    if params.hat_beta is None:
        raise ParameterError("hat_beta is required to sample the bilinear estimate")
    numerator = k_norm(bilinear(u, v, cfg), params.hat_beta, params.beta)
    denominator = k_norm(u, params.alpha, 1.0) * k_norm(v, params.tilde_beta, params.beta)
    if denominator == 0:
        raise ParameterError("sample pair has a vanishing K-norm")
    return float(numerator / denominator)


def estimate_bilinear_constant(
    params: WeightParams,
    cfg: SolverConfig,
    n_samples: int,
    seed: int,
    bilinear: Bilinear = duhamel_all,
) -> BilinearEstimate:
    """Max over seeded random pairs of ||B(u,v)||_{K^beta_hat_beta} / (||u||_{K^1_alpha} ||v||_{K^beta_tilde_beta}).

    Sample i always uses the i-th child of ``SeedSequence(seed)``, so a larger
    sample set contains every smaller one.
    """
    if n_samples < 1:
        raise ParameterError("at least one sample pair is required")
    if params.hat_beta is None:
        raise ParameterError("hat_beta is required to sample the bilinear estimate")

    logger.info(f"Sampling bilinear constant over {n_samples} pairs")
    children = np.random.SeedSequence(seed).spawn(n_samples)
    ratios = []
    for index, child in enumerate(children):
        u, v = random_space_time_pair(cfg.times, cfg.grid, np.random.default_rng(child))
        ratio = bilinear_ratio(u, v, params, cfg, bilinear)
        logger.debug(f"Bilinear sample {index}: ratio {ratio:.6e}")
        ratios.append(ratio)

    max_ratio = max(ratios)
    return BilinearEstimate(
        ratios=ratios,
        max_ratio=max_ratio,
        safety_factor=cfg.safety_factor,
        eta_hat=cfg.safety_factor * max_ratio,
    )


def calibrate_delta(eta_hat: float) -> float:
    """Largest admissible smallness level 1/(4 eta_hat)."""
    if not eta_hat > 0:
        raise ParameterError(f"eta_hat must be positive, got {eta_hat}")
    return 1.0 / (4.0 * eta_hat)
