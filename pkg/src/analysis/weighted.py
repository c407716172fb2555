"""Weighted supremum norms and the space-time K-norms.

Essential suprema are realised as maxima over grid nodes; an optional radius
cap ``r_max`` restricts the evaluation region to |x| <= r_max, away from the
periodic images near the box faces.
"""

from typing import Literal

import numpy as np

from src.analysis.models import ExponentSet, SpaceTimeField
from src.errors import ParameterError
from src.fields.grid import GridSpec
from src.fields.models import ScalarField, VectorField

SmallnessVariant = Literal["three_term", "two_term", "single_term"]


def _region_mask(grid: GridSpec, r_max: float | None) -> np.ndarray:
    radius = grid.radius()
    if r_max is None:
        return np.ones(grid.shape, dtype=bool)
    mask = np.broadcast_to(radius <= r_max, grid.shape)
    if not mask.any():
        raise ParameterError(f"no grid node within r_max = {r_max}")
    return mask


def _power(radius: np.ndarray, exponent: float) -> np.ndarray:
    # |x|^0 = 1 also at nodes where |x| underflows
    return np.ones_like(radius) if exponent == 0 else radius**exponent


def weighted_sup_norm(f: ScalarField | VectorField, beta: float, r_max: float | None = None) -> float:
    """max over nodes of |x|^beta |f(x)|."""
    if beta < 0:
        raise ParameterError(f"weight exponent must be nonnegative, got {beta}")
    grid = f.grid
    mask = _region_mask(grid, r_max)
    weighted = _power(grid.radius(), beta) * f.magnitude()
    return float(np.max(weighted[mask]))


def _window(u: SpaceTimeField, T: float | None) -> np.ndarray:
    selected = np.ones(len(u), dtype=bool) if T is None else u.times <= T * (1 + 1e-12)
    if not selected.any():
        raise ParameterError(f"no time slice with t <= {T}")
    return selected


def _slice_maxima(u: SpaceTimeField, spatial_exponent: float, r_max: float | None) -> np.ndarray:
    """max_x |x|^a |u(x, t_m)| for every slice."""
    mask = _region_mask(u.grid, r_max)
    weight = _power(u.grid.radius(), spatial_exponent)
    weighted = weight * u.magnitudes()
    return np.array([np.max(w[mask]) for w in weighted])


def k_norm(
    u: SpaceTimeField,
    alpha: float,
    beta: float,
    T: float | None = None,
    r_max: float | None = None,
) -> float:
    """max over slices t <= T and nodes of |x|^alpha t^{(beta - alpha)/2} |u(x, t)|."""
    if not 0 <= alpha <= beta:
        raise ParameterError(f"need 0 <= alpha <= beta, got alpha={alpha}, beta={beta}")
    selected = _window(u, T)
    maxima = _slice_maxima(u, alpha, r_max)
    scaled = u.times ** ((beta - alpha) / 2.0) * maxima
    return float(np.max(scaled[selected]))


def intersection_norm(
    u: SpaceTimeField,
    alpha: float,
    beta: float,
    tilde_beta: float,
    T: float | None = None,
    r_max: float | None = None,
) -> float:
    """Norm of the intersection K^1_alpha with K^beta_{tilde_beta}."""
    return max(k_norm(u, alpha, 1.0, T, r_max), k_norm(u, tilde_beta, beta, T, r_max))


def _weighted_sum_sup(
    u: SpaceTimeField,
    terms: list[tuple[float, float]],
    T: float | None,
    r_max: float | None,
) -> float:
    """max over (x, t) of sum_j |x|^{a_j} t^{b_j} |u|; one joint sup, terms summed inside."""
    selected = _window(u, T)
    mask = _region_mask(u.grid, r_max)
    radius = u.grid.radius()
    magnitudes = u.magnitudes()
    best = 0.0
    for m in np.flatnonzero(selected):
        t = u.times[m]
        weight = sum(_power(radius, a) * t**b for a, b in terms)
        best = max(best, float(np.max(np.broadcast_to(weight * magnitudes[m], u.grid.shape)[mask])))
    return best


def combined_weight_sup(
    u: SpaceTimeField,
    gamma: float,
    beta: float,
    T: float | None = None,
    r_max: float | None = None,
) -> float:
    """max of (|x|^gamma + t^{gamma/2} + |x|^beta + t^{beta/2}) |u(x, t)|."""
    if not 0 <= gamma <= beta:
        raise ParameterError(f"need 0 <= gamma <= beta, got gamma={gamma}, beta={beta}")
    terms = [(gamma, 0.0), (0.0, gamma / 2.0), (beta, 0.0), (0.0, beta / 2.0)]
    return _weighted_sum_sup(u, terms, T, r_max)


def smallness_terms(params: ExponentSet, variant: SmallnessVariant = "three_term") -> list[tuple[float, float]]:
    """(spatial, temporal) exponent pairs of the smallness weight."""
    p = params
    middle = (p.alpha, (1.0 - p.alpha) / 2.0)
    last = (p.tilde_beta, (p.beta - p.tilde_beta) / 2.0)
    if variant == "three_term":
        return [(p.tilde_gamma, (p.gamma - p.tilde_gamma) / 2.0), middle, last]
    if variant == "two_term":
        return [middle, last]
    if variant == "single_term":
        return [middle]
    raise ParameterError(f"unknown smallness variant {variant!r}")


def smallness_functional(
    flow: SpaceTimeField,
    params: ExponentSet,
    variant: SmallnessVariant = "three_term",
    T: float | None = None,
    r_max: float | None = None,
) -> float:
    """Weighted sup of a heat flow e^{t Delta} u0 sampled on ``flow``'s slices.

    ``three_term`` sums all three weights of the initial-data estimate in one
    joint sup, ``two_term`` is the intersection norm of K^1_alpha and
    K^beta_{tilde_beta} and ``single_term`` keeps |x|^alpha t^{(1-alpha)/2} only.
    """
    terms = smallness_terms(params, variant)
    if variant == "two_term":
        return intersection_norm(flow, params.alpha, params.beta, params.tilde_beta, T, r_max)
    return _weighted_sum_sup(flow, terms, T, r_max)


def radial_envelope(
    field: ScalarField | VectorField,
    radii: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """max |f| over the annuli radii[j] <= |x| < radii[j+1].

    Returns (geometric annulus centres, maxima); empty annuli are dropped.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise ParameterError("radii must be an increasing sequence of positive values")
    radius = np.broadcast_to(field.grid.radius(), field.grid.shape)
    magnitude = field.magnitude()
    centres, maxima = [], []
    for lo, hi in zip(radii[:-1], radii[1:]):
        inside = (radius >= lo) & (radius < hi)
        if inside.any():
            centres.append(np.sqrt(lo * hi))
            maxima.append(float(np.max(magnitude[inside])))
    return np.array(centres), np.array(maxima)
