"""Pointwise audits of the heat and Oseen kernels.

The heat kernel is the normalised Gaussian (4 pi t)^{-d/2} e^{-|x|^2/4t}.
The Oseen kernel F_t of e^{t Delta} P div is the periodic kernel of the grid,
evaluated off the nodes by direct summation over every resolved wavenumber
(the discrete delta has all coefficients equal).
"""

import enum
import math

import numpy as np
from loguru import logger
from pydantic import BaseModel

from src.errors import ParameterError
from src.fields.grid import GridSpec
from src.kernels.operators import heat_multiplier, project_coefficients

POINT_BATCH = 32


class KernelKind(str, enum.Enum):
    HEAT = "heat"
    OSEEN = "oseen"


class KernelBoundAudit(BaseModel):
    """Ratios |K(x,t)| |x|^alpha t^{(n - alpha)/2} over a point set, n = d (heat) or d + 1 (Oseen)."""

    kind: KernelKind
    alpha: float
    bound_id: str
    points: list[tuple[float, float]]
    ratios: list[float]
    max_ratio: float
    argmax: tuple[float, float]
    passed: bool


def heat_kernel(radius, t: float, d: int) -> np.ndarray:
    radius = np.asarray(radius, dtype=float)
    return (4.0 * np.pi * t) ** (-d / 2.0) * np.exp(-(radius**2) / (4.0 * t))


def _oseen_symbol(grid: GridSpec, t: float) -> np.ndarray:
    """M_jml(k) = e^{-t|k|^2} i k_l (delta_jm - k_j k_m/|k|^2), flattened to (d^3, N^d)."""
    d = grid.dimension
    k = grid.derivative_wavenumbers()
    symbol = np.empty((d, d, d) + grid.shape, dtype=complex)
    for m in range(d):
        unit = np.zeros((d,) + grid.shape)
        unit[m] = 1.0
        projected = project_coefficients(unit, grid)
        for l in range(d):
            symbol[:, m, l] = 1j * k[l] * projected
    symbol *= heat_multiplier(grid, t)
    return symbol.reshape(d**3, -1)


def _flat_wavevectors(grid: GridSpec) -> np.ndarray:
    k = np.broadcast_arrays(*grid.wavenumbers())
    return np.stack([component.ravel() for component in k], axis=1)


def oseen_kernel_at(grid: GridSpec, t: float, points) -> np.ndarray:
    """F_t at arbitrary points; returns shape (P, d, d, d) indexed [p, j, m, l]."""
    if t <= 0:
        raise ParameterError(f"Oseen kernel needs t > 0, got {t}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d = grid.dimension
    if points.shape[1] != d:
        raise ParameterError(f"points must have {d} coordinates")
    symbol = _oseen_symbol(grid, t)
    wavevectors = _flat_wavevectors(grid)
    values = np.empty((points.shape[0], d**3))
    for start in range(0, points.shape[0], POINT_BATCH):
        batch = points[start : start + POINT_BATCH]
        phases = np.exp(1j * batch @ wavevectors.T)
        values[start : start + POINT_BATCH] = np.real(phases @ symbol.T) / grid.volume
    return values.reshape(-1, d, d, d)


def _kernel_magnitude(kernel: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(kernel.reshape(kernel.shape[0], -1) ** 2, axis=1))


def sample_directions(d: int, count: int) -> np.ndarray:
    """Deterministic unit vectors, none aligned with a grid axis."""
    if d == 2:
        angles = (np.arange(count) + 0.25) * 2.0 * np.pi / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    # Fibonacci sphere
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    phi = i * np.pi * (3.0 - math.sqrt(5.0))
    rho = np.sqrt(1.0 - z**2)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def _check_point(grid: GridSpec, point: np.ndarray, t: float) -> None:
    t_lo, t_hi = grid.resolvable_times()
    if np.linalg.norm(point) < 2.0 * grid.spacing:
        raise ParameterError(f"point |x| = {np.linalg.norm(point):.4g} is below 2h = {2 * grid.spacing:.4g}")
    if not t_lo <= t <= t_hi:
        raise ParameterError(f"time {t} outside the resolvable window [{t_lo:.4g}, {t_hi:.4g}]")


def audit_kernel_bound(
    kind: KernelKind | str,
    alpha: float,
    points: list[tuple[tuple[float, ...], float]],
    grid: GridSpec,
) -> KernelBoundAudit:
    """Max of |kernel(x, t)| |x|^alpha t^{(n - alpha)/2} over the points."""
    kind = KernelKind(kind)
    d = grid.dimension
    order = d if kind == KernelKind.HEAT else d + 1
    if not 0 <= alpha <= order:
        raise ParameterError(f"{kind.value} audit needs 0 <= alpha <= {order}, got {alpha}")
    if not points:
        raise ParameterError("at least one point is required")

    positions = [np.asarray(point, dtype=float) for point, _ in points]
    times = [float(t) for _, t in points]
    for point, t in zip(positions, times):
        _check_point(grid, point, t)

    radii = np.array([np.linalg.norm(p) for p in positions])
    magnitudes = np.empty(len(points))
    if kind == KernelKind.HEAT:
        magnitudes[:] = [heat_kernel(r, t, d) for r, t in zip(radii, times)]
    else:
        for t in sorted(set(times)):
            index = [i for i, s in enumerate(times) if s == t]
            kernel = oseen_kernel_at(grid, t, np.stack([positions[i] for i in index]))
            magnitudes[index] = _kernel_magnitude(kernel)

    ratios = magnitudes * radii**alpha * np.asarray(times) ** ((order - alpha) / 2.0)
    best = int(np.argmax(ratios))
    finite = bool(np.all(np.isfinite(ratios)))
    logger.debug(f"{kind.value} kernel audit alpha={alpha}: max ratio {ratios[best]:.4e}")
    return KernelBoundAudit(
        kind=kind,
        alpha=alpha,
        bound_id=f"{kind.value}-pointwise-order-{order}",
        points=[(float(r), t) for r, t in zip(radii, times)],
        ratios=[float(r) for r in ratios],
        max_ratio=float(ratios[best]),
        argmax=(float(radii[best]), times[best]),
        passed=finite,
    )


def oseen_self_similarity(grid: GridSpec, t: float, radii, directions: int = 4) -> float:
    """Max relative gap between t^{(d+1)/2} F_t(x) and (4t)^{(d+1)/2} F_{4t}(2x) over |x| in ``radii``."""
    d = grid.dimension
    units = sample_directions(d, directions)
    points = np.concatenate([r * units for r in np.asarray(radii, dtype=float)])
    early = t ** ((d + 1) / 2.0) * oseen_kernel_at(grid, t, points)
    late = (4.0 * t) ** ((d + 1) / 2.0) * oseen_kernel_at(grid, 4.0 * t, 2.0 * points)
    gap = _kernel_magnitude(early - late) / _kernel_magnitude(late)
    return float(np.max(gap))


def oseen_decay_profile(grid: GridSpec, t: float, radii, directions: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Profile max_dir (1 + |y|)^{d+1} t^{(d+1)/2} |F_t(sqrt(t) y)| at rescaled radii |y|."""
    d = grid.dimension
    radii = np.asarray(radii, dtype=float)
    units = sample_directions(d, directions)
    points = np.concatenate([math.sqrt(t) * r * units for r in radii])
    rescaled = t ** ((d + 1) / 2.0) * _kernel_magnitude(oseen_kernel_at(grid, t, points))
    per_radius = rescaled.reshape(radii.size, directions).max(axis=1)
    return radii, per_radius * (1.0 + radii) ** (d + 1)
