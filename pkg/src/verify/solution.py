"""Decay and bootstrap checks on a computed mild solution."""

import numpy as np
from loguru import logger

from src.analysis.models import DecayMode, DecayReport, SpaceTimeField
from src.analysis.weighted import combined_weight_sup, k_norm, radial_envelope
from src.errors import ParameterError
from src.solver.models import PicardDiagnostics

DECAY_TOLERANCE = 0.1
STABILITY_TOLERANCE = 0.1
ENVELOPE_ANNULI = 12


def _require_converged(diagnostics: PicardDiagnostics | None) -> None:
    if diagnostics is not None and not diagnostics.converged:
        raise ParameterError(
            f"decay checks need a converged solution; iteration stopped after {diagnostics.iterations} steps"
        )


def _radius_caps(u: SpaceTimeField) -> tuple[float, float]:
    """Radius caps L/4 and L/2 used for the cap-doubling stability test."""
    L = u.grid.half_width
    return L / 4.0, L / 2.0


def verify_solution_decay(
    u: SpaceTimeField,
    gamma: float,
    beta: float,
    diagnostics: PicardDiagnostics | None = None,
) -> DecayReport:
    """Combined weight sup, temporal and spatial decay of a solution.

    Parts:
      * ``weight``: sup (|x|^gamma + t^{gamma/2} + |x|^beta + t^{beta/2}) |u| stable
        when the radius cap doubles from L/4 to L/2;
      * ``temporal``: slope of log |u(t)|_inf on |x| <= L/2, fitted over the late half
        of the slices, equals -beta/2;
      * ``spatial``: radial envelope of the median slice over [max(1, 3 sqrt(t)), L/2]
        decays at least like |x|^{-beta}.
    """
    _require_converged(diagnostics)
    if not 0 <= gamma <= beta < u.grid.dimension:
        raise ParameterError(f"need 0 <= gamma <= beta < d, got gamma={gamma}, beta={beta}")

    name = f"solution_decay(gamma={gamma},beta={beta})"
    quarter, half = _radius_caps(u)
    weight_samples = [(cap, combined_weight_sup(u, gamma, beta, r_max=cap)) for cap in (quarter, half)]
    weight = DecayReport.from_series(
        f"{name}/weight",
        DecayMode.STABLE,
        weight_samples,
        tolerance=STABILITY_TOLERANCE,
        axis="r",
        sup_constant=weight_samples[-1][1],
    )

    inside = np.broadcast_to(u.grid.radius(), u.grid.shape) <= half
    magnitudes = u.magnitudes()[:, inside]
    late = (float(u.times[len(u) // 2]), float(u.times[-1]))
    temporal = DecayReport.from_series(
        f"{name}/temporal",
        DecayMode.EQUAL,
        [(t, float(np.max(m))) for t, m in zip(u.times, magnitudes)],
        tolerance=DECAY_TOLERANCE,
        target_slope=-beta / 2.0,
        window=late,
    )

    median = len(u) // 2
    t_median = float(u.times[median])
    r_lo = max(1.0, 3.0 * np.sqrt(t_median))
    if r_lo >= half:
        raise ParameterError(f"median slice t={t_median:.4g} leaves no spatial window below L/2 = {half}")
    centres, maxima = radial_envelope(u.slice(median), np.geomspace(r_lo, half, ENVELOPE_ANNULI + 1))
    spatial = DecayReport.from_series(
        f"{name}/spatial",
        DecayMode.UPPER_BOUND,
        list(zip(centres, maxima)),
        tolerance=DECAY_TOLERANCE,
        target_slope=-beta,
        axis="r",
    )

    report = DecayReport.combine(name, [weight, temporal, spatial], sup_constant=weight.sup_constant)
    logger.info(
        f"Solution decay: temporal slope {temporal.fitted_slope}, spatial slope {spatial.fitted_slope}, "
        f"passed={report.passed}"
    )
    return report


def verify_bootstrap(
    u: SpaceTimeField,
    beta: float,
    alphas,
    hat_betas,
    diagnostics: PicardDiagnostics | None = None,
) -> DecayReport:
    """Finiteness of K^1_alpha and K^beta_{hat_beta} norms across exponent grids.

    Finite means the norm changes by at most 10% when the radius cap doubles.
    """
    _require_converged(diagnostics)
    alphas = [float(a) for a in alphas]
    hat_betas = [float(b) for b in hat_betas]
    if any(not 0 <= a <= 1 for a in alphas):
        raise ParameterError(f"alpha grid must lie in [0, 1], got {alphas}")
    if any(not 0 <= b <= beta for b in hat_betas):
        raise ParameterError(f"hat_beta grid must lie in [0, {beta}], got {hat_betas}")

    caps = _radius_caps(u)
    grids = [(a, 1.0, f"K^1_{a}") for a in alphas] + [(b, beta, f"K^{beta}_{b}") for b in hat_betas]
    parts = []
    for spatial, temporal, label in grids:
        samples = [(cap, k_norm(u, spatial, temporal, r_max=cap)) for cap in caps]
        parts.append(
            DecayReport.from_series(
                f"bootstrap/{label}",
                DecayMode.STABLE,
                samples,
                tolerance=STABILITY_TOLERANCE,
                axis="r",
                sup_constant=samples[-1][1],
            )
        )
    return DecayReport.combine(f"bootstrap(beta={beta})", parts)
