"""Detection probability, spatial-spectral maps and windowed flux.

Example:
    >>> from spdcwindow.emission_maps import filter_transmission
    >>> from spdcwindow.models import FilterConfig
    >>> filter_transmission(702.2, FilterConfig(lambda_center=702.2, fwhm=70.0))
    1.0
"""

import math
import logging

import numpy as np

from spdcwindow.models import (
    GridSpec,
    ModeGrid,
    EmissionMode,
    FilterConfig,
    SourceConfig,
    QuadratureSpec,
    WindowArrangement,
)
from spdcwindow.exceptions import ConfigurationError
from spdcwindow.utils.numeric_utils import as_scalar, compensated_sum
from spdcwindow.physics.spdc_model import (
    idler_wavelength,
    residual_phase_array,
    valid_wavelength_mask,
    phase_matching_amplitude_array,
)

__all__ = [
    'filter_transmission',
    'detection_probability',
    'probability_array',
    'compute_maps',
    'integrated_flux',
    'phase_range_metric',
    'phase_range_over_region',
]

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

FOUR_LN2 = 4.0 * math.log(2.0)


# --------------------------------------------------------
# ----             Filter and probability             ----
# --------------------------------------------------------
def filter_transmission(
    lambda_nm: float | np.ndarray, filter: FilterConfig
) -> float | np.ndarray:
    """Gaussian filter transmission, peak value 1 at the center wavelength."""
    offset = np.asarray(lambda_nm, dtype=float) - filter.lambda_center
    return as_scalar(
        np.exp(-FOUR_LN2 * offset * offset / (filter.fwhm * filter.fwhm))
    )


def probability_array(
    theta_ext: np.ndarray,
    lambda_s: np.ndarray,
    cfg: SourceConfig,
    filter: FilterConfig,
) -> np.ndarray:
    """Unnormalized detection probability on broadcast ``(theta, lambda)`` arrays.

    Cells whose signal or idler wavelength lies outside the modeled band
    contribute zero.
    """
    theta = np.asarray(theta_ext, dtype=float)
    lam_s = np.asarray(lambda_s, dtype=float)
    valid = valid_wavelength_mask(lam_s, cfg)
    safe_lam = np.where(valid, lam_s, cfg.lambda_degenerate)

    lam_i = idler_wavelength(safe_lam, cfg.lambda_pump)
    filters = filter_transmission(safe_lam, filter) * filter_transmission(
        lam_i, filter
    )
    amplitude = filters * phase_matching_amplitude_array(theta, safe_lam, cfg)
    return np.where(valid, amplitude * amplitude, 0.0)


def detection_probability(
    mode: EmissionMode, cfg: SourceConfig, filter: FilterConfig
) -> float:
    """Pair detection probability of ``mode`` behind two identical filters.

    ``P = [G(lambda_s) G(lambda_i) sinc(delta_kappa d / 2)]^2`` (unnormalized);
    an unmodeled conjugate gives 0.
    """
    return float(probability_array(mode.theta_ext, mode.lambda_s, cfg, filter))


# --------------------------------------------------------
# ----                  Map generation                ----
# --------------------------------------------------------
def compute_maps(
    grid: GridSpec, cfg: SourceConfig, filter: FilterConfig
) -> ModeGrid:
    """Fill the probability and residual-phase maps at the cell centers.

    Probabilities are normalized to a grid maximum of exactly 1; invalid cells
    get ``P = 0`` and an absent (``NaN``) phase.

    Raises:
        ConfigurationError: If no cell of the grid is inside the modeled band.
    """
    if not cfg.calibrated:
        logger.warning('Computing maps with an uncalibrated compensation')

    theta = grid.theta_centers()[:, np.newaxis]
    lambdas = grid.lambda_centers()[np.newaxis, :]
    valid_columns = valid_wavelength_mask(lambdas, cfg)
    if not np.any(valid_columns):
        raise ConfigurationError(
            'Map grid lies entirely outside the modeled band '
            f'[{grid.lambda_min:g}, {grid.lambda_max:g}] nm'
        )
    logger.info('Computing %d x %d maps', grid.n_theta, grid.n_lambda)

    probability = probability_array(theta, lambdas, cfg, filter)
    peak = float(np.max(probability))
    if peak <= 0:
        raise ConfigurationError('Map grid contains no emission')
    probability = probability / peak

    safe = np.where(valid_columns, lambdas, cfg.lambda_degenerate)
    phase = np.asarray(residual_phase_array(theta, safe, cfg))
    phase = np.where(valid_columns, phase, np.nan)
    return ModeGrid(spec=grid, values_P=probability, values_phi=phase)


# --------------------------------------------------------
# ----                 Windowed integrals             ----
# --------------------------------------------------------
def _check_window(
    arr: WindowArrangement, quadrature: QuadratureSpec
) -> tuple[float, float]:
    lo, hi = arr.theta_bounds
    tol = 1e-12
    if lo < quadrature.theta_min - tol or hi > quadrature.theta_max + tol:
        raise ConfigurationError(
            f'Iris window [{math.degrees(lo):.4f}, {math.degrees(hi):.4f}] deg '
            f'outside modeled angles [{math.degrees(quadrature.theta_min):.4f}, '
            f'{math.degrees(quadrature.theta_max):.4f}] deg'
        )
    return lo, hi


def integrated_flux(
    arr: WindowArrangement, cfg: SourceConfig, quadrature: QuadratureSpec
) -> float:
    """Pair flux through the iris annulus and filters, arbitrary units.

    Midpoint rule over the full modeled band and over a fixed lattice of
    angular cells (no wider than ``quadrature.max_theta_step``) spanning the
    modeled angles; cells cut by the iris edges are clipped to the window.
    The weight is the cone measure ``2 pi sin(theta)``.

    The lattice does not move with the window, so the flux is continuous and
    strictly increasing in the iris width.

    Raises:
        ConfigurationError: If the window leaves the modeled angular range.
    """
    lo, hi = _check_window(arr, quadrature)
    n_cells = max(
        1,
        math.ceil(
            (quadrature.theta_max - quadrature.theta_min)
            / quadrature.max_theta_step
        ),
    )
    edges = np.linspace(quadrature.theta_min, quadrature.theta_max, n_cells + 1)
    cell_lo = np.clip(edges[:-1], lo, hi)
    cell_hi = np.clip(edges[1:], lo, hi)
    inside = cell_hi > cell_lo
    if not np.any(inside):
        return 0.0
    theta = 0.5 * (cell_lo[inside] + cell_hi[inside])
    d_theta = cell_hi[inside] - cell_lo[inside]

    d_lambda = (quadrature.lambda_max - quadrature.lambda_min) / quadrature.n_lambda
    lambdas = (
        quadrature.lambda_min + (np.arange(quadrature.n_lambda) + 0.5) * d_lambda
    )

    probability = probability_array(
        theta[:, np.newaxis], lambdas[np.newaxis, :], cfg, arr.filter
    )
    weights = (2.0 * np.pi * np.sin(theta) * d_theta * d_lambda)[:, np.newaxis]
    return compensated_sum(probability * weights)


def phase_range_over_region(
    theta_bounds: tuple[float, float],
    lambda_bounds: tuple[float, float],
    cfg: SourceConfig,
    points: int,
    metric: str = 'peak_to_peak',
    filter: FilterConfig | None = None,
) -> float:
    """Spread of the residual phase over a rectangular (theta, lambda) region.

    Args:
        theta_bounds (tuple[float, float]): Angular edges in rad (may coincide).
        lambda_bounds (tuple[float, float]): Wavelength edges in nm (may coincide).
        cfg (SourceConfig): Calibrated source configuration.
        points (int): Samples per axis, edges included.
        metric (str, optional): ``peak_to_peak`` or ``weighted_std``.
        filter (FilterConfig | None, optional): Filter for the probability
            weights of ``weighted_std``.

    Returns:
        float: Phase spread in rad.
    """
    thetas = np.linspace(theta_bounds[0], theta_bounds[1], points)
    lambdas = np.linspace(lambda_bounds[0], lambda_bounds[1], points)
    theta_grid, lambda_grid = np.meshgrid(thetas, lambdas, indexing='ij')
    valid = valid_wavelength_mask(lambda_grid, cfg)
    if not np.any(valid):
        raise ConfigurationError(
            f'Phase region [{lambda_bounds[0]:g}, {lambda_bounds[1]:g}] nm '
            'lies outside the modeled band'
        )
    safe = np.where(valid, lambda_grid, cfg.lambda_degenerate)
    phase = np.asarray(residual_phase_array(theta_grid, safe, cfg))[valid]

    if metric == 'peak_to_peak':
        return float(np.max(phase) - np.min(phase))
    if metric == 'weighted_std':
        if filter is None:
            raise ValueError('weighted_std needs the filter for its weights')
        weights = probability_array(theta_grid, safe, cfg, filter)[valid]
        if float(np.sum(weights)) <= 0:
            return 0.0
        mean = np.average(phase, weights=weights)
        return float(np.sqrt(np.average((phase - mean) ** 2, weights=weights)))
    raise ValueError(
        f"Unknown phase metric {metric!r}; use 'peak_to_peak' or 'weighted_std'"
    )


def phase_range_metric(
    arr: WindowArrangement,
    cfg: SourceConfig,
    quadrature: QuadratureSpec,
    metric: str = 'peak_to_peak',
) -> float:
    """Residual-phase spread over the accepted window, in rad.

    The region is the iris annulus times the filter's half-maximum band.
    Every sample counts regardless of its probability.

    Raises:
        ConfigurationError: If the window leaves the modeled angular range.
    """
    theta_bounds = _check_window(arr, quadrature)
    half = arr.filter.fwhm / 2
    lambda_bounds = (arr.filter.lambda_center - half, arr.filter.lambda_center + half)
    return phase_range_over_region(
        theta_bounds,
        lambda_bounds,
        cfg,
        quadrature.region_points,
        metric=metric,
        filter=arr.filter,
    )
