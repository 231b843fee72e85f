"""Physics of the two-crystal type-I (ooe) source.

The model works in the plane-wave CW pump limit: the idler carries the pump
energy minus the signal energy and the opposite transverse wavevector. The
relative phase between the VV and HH amplitudes is evaluated in the
(polar angle x wavelength) plane with the signal azimuth fixed to the
principal plane of the second crystal.

Each operation has a scalar form taking an :class:`EmissionMode` and an
``*_array`` form taking broadcastable ``theta_ext`` (rad) and ``lambda_s``
(nm) arrays, used by the map and quadrature code.
"""

import math
import logging
from dataclasses import replace
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from spdcwindow.models import SourceConfig, EmissionMode
from spdcwindow.exceptions import ConfigurationError
from spdcwindow.config.settings import (
    DELTA_KAPPA_TOL,
    CALIBRATION_POINTS,
    CALIBRATION_SCAN_POINTS,
    OPENING_ANGLE_BRACKET_DEG,
    CALIBRATION_HALF_THETA_DEG,
    CALIBRATION_TILT_XTOL_RAD,
    CALIBRATION_HALF_LAMBDA_NM,
    CALIBRATION_TILT_BOUNDS_DEG,
)
from spdcwindow.utils.numeric_utils import sinc, nm_to_um, as_scalar
from spdcwindow.physics.crystal_optics import (
    index_ordinary,
    index_extraordinary,
    wavevector_magnitude,
    longitudinal_component,
    refract_external_to_internal,
)

__all__ = [
    'idler_wavelength',
    'conjugate_idler',
    'delta_kappa',
    'delta_kappa_array',
    'phase_matching_amplitude',
    'phase_matching_amplitude_array',
    'phase_matching_angle',
    'degenerate_opening_angle',
    'internal_opening_angle',
    'collinear_cut_angle',
    'decoherence_phase',
    'decoherence_phase_array',
    'compensation_phase',
    'compensation_phase_array',
    'compensation_arm_phase',
    'residual_phase',
    'residual_phase_array',
    'calibration_variance',
    'calibrate_compensation',
    'valid_wavelength_mask',
]

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# Fixed-point steps solving an e-ray's internal angle; converges to ~1e-12
E_RAY_ITERATIONS = 5


# --------------------------------------------------------
# ----            Conjugate mode and helpers          ----
# --------------------------------------------------------
def idler_wavelength(
    lambda_s: float | np.ndarray, lambda_pump: float
) -> float | np.ndarray:
    """Return the energy-conserving idler wavelength (same units as inputs)."""
    lam_s = np.asarray(lambda_s, dtype=float)
    return as_scalar(1.0 / (1.0 / lambda_pump - 1.0 / lam_s))


def _transverse_wavevector(
    theta_ext: np.ndarray, lambda_um: np.ndarray
) -> np.ndarray:
    # conserved across the exit face, so the lab-frame value holds inside
    return 2.0 * np.pi * np.sin(theta_ext) / lambda_um


def _idler_angle(
    theta_ext: np.ndarray,
    lambda_s: float | np.ndarray,
    lambda_i: float | np.ndarray,
) -> np.ndarray:
    return np.arcsin(np.sin(theta_ext) * lambda_i / lambda_s)


def _check_signal_wavelength(lambda_s: float, cfg: SourceConfig) -> None:
    if lambda_s <= cfg.lambda_pump:
        raise ValueError(
            f'Signal wavelength {lambda_s} nm must exceed the pump '
            f'wavelength {cfg.lambda_pump} nm'
        )


def valid_wavelength_mask(
    lambda_s: np.ndarray, cfg: SourceConfig
) -> np.ndarray:
    """Mask of signal wavelengths (nm) whose signal and idler are both modeled.

    Transverse wavevectors never exceed ``k`` for real external angles since
    every index is >= 1, so the wavelength test is the only one needed.
    """
    lam_s = np.asarray(lambda_s, dtype=float)
    model = cfg.sellmeier
    with np.errstate(divide='ignore', invalid='ignore'):
        lam_i = 1.0 / (1.0 / cfg.lambda_pump - 1.0 / lam_s)
    lam_s_um = nm_to_um(lam_s)
    lam_i_um = nm_to_um(lam_i)
    return (
        (lam_s > cfg.lambda_pump)
        & (lam_s_um >= model.lambda_min)
        & (lam_s_um <= model.lambda_max)
        & (lam_i_um >= model.lambda_min)
        & (lam_i_um <= model.lambda_max)
    )


def conjugate_idler(mode: EmissionMode, cfg: SourceConfig) -> EmissionMode:
    """Return the idler mode paired with ``mode``.

    The idler has the conjugate wavelength, the opposite azimuth and the
    external angle whose transverse wavevector matches the signal's.

    Raises:
        DispersionRangeError: If the idler wavelength is not modeled.
    """
    _check_signal_wavelength(mode.lambda_s, cfg)
    lambda_i = idler_wavelength(mode.lambda_s, cfg.lambda_pump)
    # raises DispersionRangeError for an unmodeled conjugate
    index_ordinary(float(nm_to_um(lambda_i)), cfg.sellmeier)
    sin_theta_i = math.sin(mode.theta_ext) * lambda_i / mode.lambda_s
    if sin_theta_i >= 1.0:
        raise ValueError(
            f'Idler of mode {mode} would leave the crystal beyond grazing'
        )
    return EmissionMode(
        theta_ext=math.asin(sin_theta_i),
        phi=math.fmod(mode.phi + math.pi, 2.0 * math.pi),
        lambda_s=lambda_i,
    )


# --------------------------------------------------------
# ----                Phase matching                  ----
# --------------------------------------------------------
def delta_kappa_array(
    theta_ext: float | np.ndarray,
    lambda_s: float | np.ndarray,
    cfg: SourceConfig,
) -> float | np.ndarray:
    """Longitudinal wavevector mismatch ``k_p,z - k_s,z - k_i,z`` in rad/um.

    The pump is an extraordinary wave at normal incidence; signal and idler
    are ordinary waves of the creating crystal.
    """
    model = cfg.sellmeier
    lam_p = float(nm_to_um(cfg.lambda_pump))
    lam_s = nm_to_um(lambda_s)
    lam_i = nm_to_um(idler_wavelength(lambda_s, cfg.lambda_pump))
    q = _transverse_wavevector(np.asarray(theta_ext, dtype=float), lam_s)

    k_p = wavevector_magnitude(
        lam_p, index_extraordinary(lam_p, cfg.cut_angle, model)
    )
    k_s = wavevector_magnitude(lam_s, index_ordinary(lam_s, model))
    k_i = wavevector_magnitude(lam_i, index_ordinary(lam_i, model))
    return as_scalar(
        k_p - longitudinal_component(k_s, q) - longitudinal_component(k_i, q)
    )


def delta_kappa(mode: EmissionMode, cfg: SourceConfig) -> float:
    """Wavevector mismatch of ``mode`` in rad/um."""
    _check_signal_wavelength(mode.lambda_s, cfg)
    return float(delta_kappa_array(mode.theta_ext, mode.lambda_s, cfg))


def phase_matching_amplitude_array(
    theta_ext: float | np.ndarray,
    lambda_s: float | np.ndarray,
    cfg: SourceConfig,
) -> float | np.ndarray:
    """Normalized amplitude ``sinc(delta_kappa * d / 2)``."""
    dk = np.asarray(delta_kappa_array(theta_ext, lambda_s, cfg))
    return sinc(dk * cfg.crystal_length_d / 2.0)


def phase_matching_amplitude(mode: EmissionMode, cfg: SourceConfig) -> float:
    """Normalized phase-matching amplitude of ``mode``, in [-0.2173, 1]."""
    return float(sinc(delta_kappa(mode, cfg) * cfg.crystal_length_d / 2.0))


def phase_matching_angle(lambda_s: float, cfg: SourceConfig) -> float:
    """External angle (rad) where the mismatch vanishes at ``lambda_s`` (nm).

    Raises:
        ConfigurationError: If the mismatch has no root in the search bracket.
    """
    hi = math.radians(OPENING_ANGLE_BRACKET_DEG[1])

    def mismatch(theta: float) -> float:
        return float(delta_kappa_array(theta, lambda_s, cfg))

    at_zero = mismatch(0.0)
    if abs(at_zero) < DELTA_KAPPA_TOL:
        return 0.0
    at_hi = mismatch(hi)
    if at_zero > 0 or at_hi < 0:
        raise ConfigurationError(
            f'not phase-matchable at {lambda_s:g} nm: delta_kappa goes from '
            f'{at_zero:.3e} to {at_hi:.3e} rad/um over '
            f'[0, {OPENING_ANGLE_BRACKET_DEG[1]:g}] deg'
        )
    root = bisect(mismatch, 0.0, hi, xtol=1e-15, maxiter=200)
    residual = mismatch(root)
    logger.debug(
        'Phase-matching root at %.6f deg (lambda %.2f nm, residual %.2e)',
        math.degrees(root),
        lambda_s,
        residual,
    )
    if abs(residual) >= DELTA_KAPPA_TOL:
        raise ConfigurationError(
            f'Phase-matching bisection stalled at |delta_kappa| = {residual:.3e}'
        )
    return root


@lru_cache(maxsize=64)
def degenerate_opening_angle(cfg: SourceConfig) -> float:
    """External cone angle (rad) of degenerate emission.

    Raises:
        ConfigurationError: If the source is not phase-matchable at degeneracy.
    """
    try:
        return phase_matching_angle(cfg.lambda_degenerate, cfg)
    except ConfigurationError as e:
        logger.error(f'Degenerate emission cannot be phase matched: {e}')
        raise


def internal_opening_angle(cfg: SourceConfig) -> float:
    """Degenerate cone angle inside the creating crystal, in rad."""
    lam_d = float(nm_to_um(cfg.lambda_degenerate))
    return float(
        refract_external_to_internal(
            degenerate_opening_angle(cfg),
            index_ordinary(lam_d, cfg.sellmeier),
        )
    )


def collinear_cut_angle(cfg: SourceConfig) -> float:
    """Cut angle (rad) phase matching the collinear degenerate mode.

    Raises:
        ConfigurationError: If no cut angle achieves collinear matching.
    """
    model = cfg.sellmeier
    lam_p = float(nm_to_um(cfg.lambda_pump))
    lam_d = float(nm_to_um(cfg.lambda_degenerate))
    inv_o_p = 1.0 / index_ordinary(lam_p, model) ** 2
    inv_e_p = 1.0 / index_extraordinary(lam_p, math.pi / 2, model) ** 2
    inv_o_d = 1.0 / index_ordinary(lam_d, model) ** 2
    sin_sq = (inv_o_d - inv_o_p) / (inv_e_p - inv_o_p)
    if not 0.0 <= sin_sq <= 1.0:
        raise ConfigurationError(
            'Collinear degenerate phase matching is impossible for this pump'
        )
    return math.asin(math.sqrt(sin_sq))


# --------------------------------------------------------
# ----               Relative phases                  ----
# --------------------------------------------------------
def _extraordinary_kz(
    lambda_um: np.ndarray,
    q: np.ndarray,
    axis_angle: float,
    side: float,
    cfg: SourceConfig,
) -> np.ndarray:
    """Longitudinal wavevector of an e-ray crossing a plate at normal geometry.

    ``side = -1`` when the ray leans toward the optic axis, ``+1`` away from it.
    """
    model = cfg.sellmeier
    k_vac = 2.0 * np.pi / lambda_um
    n = np.asarray(index_ordinary(lambda_um, model))
    for _ in range(E_RAY_ITERATIONS):
        theta_int = np.arcsin(q / (k_vac * n))
        alpha = np.abs(axis_angle + side * theta_int)
        n = np.asarray(index_extraordinary(lambda_um, alpha, model))
    return np.asarray(longitudinal_component(k_vac * n, q))


def _ordinary_kz(
    lambda_um: np.ndarray, q: np.ndarray, cfg: SourceConfig
) -> np.ndarray:
    k = wavevector_magnitude(lambda_um, index_ordinary(lambda_um, cfg.sellmeier))
    return np.asarray(longitudinal_component(k, q))


def decoherence_phase_array(
    theta_ext: float | np.ndarray,
    lambda_s: float | np.ndarray,
    cfg: SourceConfig,
) -> float | np.ndarray:
    """Relative phase acquired in the two-crystal emission, in rad (unwrapped).

    The pair born in the first crystal crosses the second one as two e-rays;
    the pump component feeding the second crystal crosses the first one as an
    o-wave at normal incidence. The signal leans toward the second crystal's
    optic axis, the idler (opposite azimuth) away from it.
    """
    lam_s = nm_to_um(lambda_s)
    lam_i = nm_to_um(idler_wavelength(lambda_s, cfg.lambda_pump))
    lam_p = float(nm_to_um(cfg.lambda_pump))
    q = _transverse_wavevector(np.asarray(theta_ext, dtype=float), lam_s)

    kz_s = _extraordinary_kz(lam_s, q, cfg.cut_angle, -1.0, cfg)
    kz_i = _extraordinary_kz(lam_i, q, cfg.cut_angle, 1.0, cfg)
    k_p = wavevector_magnitude(lam_p, index_ordinary(lam_p, cfg.sellmeier))
    return as_scalar(
        cfg.phase_sign * (cfg.crystal_length_d * (kz_s + kz_i - k_p))
    )


def decoherence_phase(mode: EmissionMode, cfg: SourceConfig) -> float:
    """Relative SPDC phase of ``mode``; independent of the azimuth."""
    _check_signal_wavelength(mode.lambda_s, cfg)
    return float(decoherence_phase_array(mode.theta_ext, mode.lambda_s, cfg))


def compensation_arm_phase(
    theta_ext: float | np.ndarray,
    lambda_nm: float | np.ndarray,
    cfg: SourceConfig,
) -> float | np.ndarray:
    """e-minus-o phase (rad) of one photon crossing its compensation element.

    ``theta_ext`` and ``lambda_nm`` describe the photon itself; each element
    is oriented with the optic axis in its arm's plane, leaning away from
    the photon.
    """
    if cfg.comp_thickness == 0:
        return as_scalar(np.zeros(np.broadcast(theta_ext, lambda_nm).shape))
    lam = nm_to_um(lambda_nm)
    q = _transverse_wavevector(np.asarray(theta_ext, dtype=float), lam)
    kz_e = _extraordinary_kz(lam, q, cfg.comp_axis_angle, 1.0, cfg)
    kz_o = _ordinary_kz(lam, q, cfg)
    return as_scalar(cfg.comp_thickness * (kz_e - kz_o))


def compensation_phase_array(
    theta_ext: float | np.ndarray,
    lambda_s: float | np.ndarray,
    cfg: SourceConfig,
) -> float | np.ndarray:
    """Total phase (rad) subtracted by the signal and idler compensators.

    Each arm is :func:`compensation_arm_phase` of its own photon: the signal
    mode and its conjugate idler, whose external angle carries the same
    transverse wavevector.
    """
    if cfg.comp_thickness == 0:
        return as_scalar(np.zeros(np.broadcast(theta_ext, lambda_s).shape))
    theta_s = np.asarray(theta_ext, dtype=float)
    lambda_i = idler_wavelength(lambda_s, cfg.lambda_pump)
    theta_i = _idler_angle(theta_s, lambda_s, lambda_i)

    arm_s = np.asarray(compensation_arm_phase(theta_s, lambda_s, cfg))
    arm_i = np.asarray(compensation_arm_phase(theta_i, lambda_i, cfg))
    return as_scalar(cfg.phase_sign * (arm_s + arm_i))


def compensation_phase(mode: EmissionMode, cfg: SourceConfig) -> float:
    """Compensation phase of ``mode``; 0 without compensation elements."""
    _check_signal_wavelength(mode.lambda_s, cfg)
    return float(compensation_phase_array(mode.theta_ext, mode.lambda_s, cfg))


def _relative_phase_array(
    theta_ext: float | np.ndarray,
    lambda_s: float | np.ndarray,
    cfg: SourceConfig,
) -> np.ndarray:
    return np.asarray(
        decoherence_phase_array(theta_ext, lambda_s, cfg)
    ) - np.asarray(compensation_phase_array(theta_ext, lambda_s, cfg))


def residual_phase_array(
    theta_ext: float | np.ndarray,
    lambda_s: float | np.ndarray,
    cfg: SourceConfig,
) -> float | np.ndarray:
    """Residual relative phase ``phi_0 + Phi_DC - Phi_comp`` in rad."""
    return as_scalar(cfg.phi_0 + _relative_phase_array(theta_ext, lambda_s, cfg))


def residual_phase(mode: EmissionMode, cfg: SourceConfig) -> float:
    """Residual relative phase of ``mode`` in rad (unwrapped)."""
    _check_signal_wavelength(mode.lambda_s, cfg)
    return float(residual_phase_array(mode.theta_ext, mode.lambda_s, cfg))


# --------------------------------------------------------
# ----            Compensation calibration            ----
# --------------------------------------------------------
def _calibration_region(
    cfg: SourceConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    theta_0 = degenerate_opening_angle(cfg)
    half_theta = math.radians(CALIBRATION_HALF_THETA_DEG)
    thetas = np.linspace(
        max(theta_0 - half_theta, 0.0), theta_0 + half_theta, CALIBRATION_POINTS
    )
    lambdas = np.linspace(
        cfg.lambda_degenerate - CALIBRATION_HALF_LAMBDA_NM,
        cfg.lambda_degenerate + CALIBRATION_HALF_LAMBDA_NM,
        CALIBRATION_POINTS,
    )
    theta_grid, lambda_grid = np.meshgrid(thetas, lambdas, indexing='ij')
    weights = (
        np.asarray(phase_matching_amplitude_array(theta_grid, lambda_grid, cfg))
        ** 2
    )
    return theta_grid, lambda_grid, weights


def calibration_variance(
    cfg: SourceConfig,
    comp_tilt: float,
    region: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> float:
    """Probability-weighted variance of the relative phase around the central mode.

    Args:
        cfg (SourceConfig): Source configuration.
        comp_tilt (float): Compensation tilt to evaluate, rad.
        region (tuple | None, optional): Precomputed ``(theta, lambda, weights)``.

    Returns:
        float: Weighted variance in rad^2; independent of ``phi_0``.
    """
    theta_grid, lambda_grid, weights = region or _calibration_region(cfg)
    trial = replace(cfg, comp_tilt=comp_tilt)
    phase = _relative_phase_array(theta_grid, lambda_grid, trial)
    mean = np.average(phase, weights=weights)
    return float(np.average((phase - mean) ** 2, weights=weights))


def calibrate_compensation(cfg: SourceConfig) -> SourceConfig:
    """Tune the compensation tilt and the initial phase.

    The tilt minimizes :func:`calibration_variance`: a scan over the tilt
    bracket followed by a bounded golden-section/parabolic refinement around
    the best scanned tilt. ``phi_0`` is then set so the residual phase of the
    central mode is exactly zero.

    Args:
        cfg (SourceConfig): Configuration to calibrate.

    Returns:
        SourceConfig: Calibrated copy of ``cfg``.
    """
    theta_0 = degenerate_opening_angle(cfg)
    best_tilt = cfg.comp_tilt

    if cfg.comp_thickness > 0:
        region = _calibration_region(cfg)
        lo_deg, hi_deg = CALIBRATION_TILT_BOUNDS_DEG
        scan = np.radians(np.linspace(lo_deg, hi_deg, CALIBRATION_SCAN_POINTS))
        values = [calibration_variance(cfg, float(t), region) for t in scan]
        i_best = int(np.argmin(values))
        logger.debug(
            'Tilt scan best %.3f deg (variance %.4e)',
            math.degrees(scan[i_best]),
            values[i_best],
        )
        lower = float(scan[max(i_best - 1, 0)])
        upper = float(scan[min(i_best + 1, len(scan) - 1)])
        result = minimize_scalar(
            lambda t: calibration_variance(cfg, t, region),
            bounds=(lower, upper),
            method='bounded',
            options={'xatol': CALIBRATION_TILT_XTOL_RAD},
        )
        if result.fun <= values[i_best]:
            best_tilt = float(result.x)
        else:
            best_tilt = float(scan[i_best])
        if math.isclose(
            best_tilt, math.radians(lo_deg), abs_tol=CALIBRATION_TILT_XTOL_RAD
        ) or math.isclose(
            best_tilt, math.radians(hi_deg), abs_tol=CALIBRATION_TILT_XTOL_RAD
        ):
            logger.warning(
                'Compensation tilt %.3f deg sits on the search bound',
                math.degrees(best_tilt),
            )

    tuned = replace(cfg, comp_tilt=best_tilt)
    central = float(
        _relative_phase_array(theta_0, cfg.lambda_degenerate, tuned)
    )
    calibrated = replace(tuned, phi_0=-central, calibrated=True)
    logger.info(
        'Compensation calibrated: tilt %.4f deg, phi_0 %.6f rad',
        math.degrees(best_tilt),
        -central,
    )
    return calibrated
