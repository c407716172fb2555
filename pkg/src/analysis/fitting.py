"""Log-log exponent fits."""

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict
from scipy import stats

from src.errors import FitError

MIN_FIT_SAMPLES = 5
EDGE_FRACTION = 0.2


class FitResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    slope: float
    intercept: float
    r_squared: float


def default_window(abscissae, edge_fraction: float = EDGE_FRACTION) -> tuple[float, float]:
    """Drop the first and last ``edge_fraction`` of the range, measured in log scale."""
    logs = np.log(np.asarray(abscissae, dtype=float))
    lo, hi = logs.min(), logs.max()
    span = hi - lo
    return float(np.exp(lo + edge_fraction * span)), float(np.exp(hi - edge_fraction * span))


def fit_decay_exponent(
    samples: list[tuple[float, float]],
    window: tuple[float, float] | None = None,
) -> FitResult:
    """Least-squares line through (log s, log v) for samples with s inside ``window``.

    A series with no variance in v has slope 0 and R^2 = 1 by convention.
    """
    points = np.asarray(samples, dtype=float).reshape(-1, 2)
    s, v = points[:, 0], points[:, 1]
    if window is not None:
        lo, hi = window
        # relative slack so window ends computed from the abscissae themselves stay inside
        inside = (s >= lo * (1 - 1e-12)) & (s <= hi * (1 + 1e-12))
        s, v = s[inside], v[inside]
    if s.size < MIN_FIT_SAMPLES:
        raise FitError(f"need at least {MIN_FIT_SAMPLES} samples in the fit window, got {s.size}")
    if np.any(s <= 0):
        raise FitError("abscissae must be positive")
    if np.any(v <= 0):
        raise FitError("values must be positive for a log-log fit")

    log_s, log_v = np.log(s), np.log(v)
    if np.ptp(log_s) == 0:
        raise FitError("abscissae inside the window are all equal")
    if np.ptp(log_v) == 0:
        return FitResult(slope=0.0, intercept=float(log_v[0]), r_squared=1.0)

    fit = stats.linregress(log_s, log_v)
    r_squared = float(fit.rvalue**2)
    if r_squared < 0.5:
        logger.debug(f"Weak log-log fit: slope={fit.slope:.4f}, R^2={r_squared:.3f}")
    return FitResult(slope=float(fit.slope), intercept=float(fit.intercept), r_squared=r_squared)
