"""Radial profiles sampled on the grid: regularised power laws and a smooth taper."""

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from src.errors import ParameterError

TAPER_START = 0.7
TAPER_END = 0.95


def sphere_area(d: int) -> float:
    """|S^{d-1}|."""
    return 2.0 * math.pi ** (d / 2.0) / special.gamma(d / 2.0)


@lru_cache(maxsize=64)
def _missing_mass_unit(p: float, d: int) -> float:
    def integrand(r: float) -> float:
        return r ** (d - 1) * (r ** (-p) - (1.0 + r * r) ** (-p / 2.0))

    head, _ = integrate.quad(integrand, 0.0, 1.0, limit=200)
    tail, _ = integrate.quad(integrand, 1.0, np.inf, limit=200)
    return sphere_area(d) * (head + tail)


def missing_mass(p: float, d: int, eps: float) -> float:
    """Integral over R^d of |x|^{-p} - (eps^2 + |x|^2)^{-p/2}; finite for d - 2 < p < d."""
    if not d - 2 < p < d:
        raise ParameterError(f"missing mass needs {d - 2} < p < {d}, got {p}")
    return eps ** (d - p) * _missing_mass_unit(float(p), d)


def gaussian_core(radius: np.ndarray, mass: float, eps: float, d: int) -> np.ndarray:
    """Gaussian bump of width eps carrying total integral ``mass``."""
    amplitude = mass / (math.pi ** (d / 2.0) * eps**d)
    return amplitude * np.exp(-(radius**2) / eps**2)


def regularized_powerlaw(radius: np.ndarray, p: float, eps: float, d: int, mass_matched: bool = False) -> np.ndarray:
    """(eps^2 + |x|^2)^{-p/2}, plus a Gaussian core of the missing mass when ``mass_matched``.

    The core restores the integral of |x|^{-p}, so heat flows of the profile
    approach those of the pure power law at rate eps^2/t instead of
    (eps^2/t)^{(d-p)/2}.
    """
    profile = (eps**2 + radius**2) ** (-p / 2.0)
    if mass_matched:
        profile = profile + gaussian_core(radius, missing_mass(p, d, eps), eps, d)
    return profile


def smooth_taper(radius: np.ndarray, half_width: float) -> np.ndarray:
    """C-infinity cutoff: 1 for |x| <= 0.7 L, 0 for |x| >= 0.95 L."""
    s = (radius / half_width - TAPER_START) / (TAPER_END - TAPER_START)
    s = np.clip(s, 0.0, 1.0)

    def bump(z):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)

    rise, fall = bump(1.0 - s), bump(s)
    return rise / (rise + fall)
