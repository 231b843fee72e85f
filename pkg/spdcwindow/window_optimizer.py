"""Iso-flux window arrangements and the phase-range optimum.

For every scanned filter FWHM the iris width is solved so that the pair flux
matches a target; the arrangement with the smallest residual-phase spread is
the optimum.
"""

import math
import logging
from dataclasses import replace
from concurrent.futures import ThreadPoolExecutor

from tqdm import tqdm
from scipy.optimize import bisect

from spdcwindow.models import (
    FilterConfig,
    IsoFluxCurve,
    SourceConfig,
    QuadratureSpec,
    WindowArrangement,
)
from spdcwindow.exceptions import EmptyCurveError, InfeasibleFluxError
from spdcwindow.emission_maps import integrated_flux, phase_range_metric
from spdcwindow.config.settings import (
    DEFAULT_FLUX_RTOL,
    MAX_IRIS_WIDTH_DEG,
    MIN_IRIS_WIDTH_RAD,
    DEFAULT_MAX_WORKERS,
    DEFAULT_PHASE_METRIC,
    DEFAULT_MAX_ITERATIONS,
)
from spdcwindow.physics.spdc_model import degenerate_opening_angle

__all__ = [
    'iris_width_bracket',
    'solve_iris_for_flux',
    'build_iso_flux_curve',
    'find_optimal_window',
]

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# Width resolution of the bisection, far below the flux tolerance it serves
WIDTH_XTOL_RAD = 1e-10


def iris_width_bracket(
    iris_center: float, quadrature: QuadratureSpec
) -> tuple[float, float]:
    """Admissible iris widths (rad) for an iris centered at ``iris_center``."""
    upper = min(
        2.0 * (iris_center - quadrature.theta_min),
        math.radians(MAX_IRIS_WIDTH_DEG),
        2.0 * (quadrature.theta_max - iris_center),
    )
    return MIN_IRIS_WIDTH_RAD, upper


def _arrangement(
    iris_center: float, iris_width: float, filter: FilterConfig
) -> WindowArrangement:
    return WindowArrangement(
        iris_center=iris_center, iris_width=iris_width, filter=filter
    )


def solve_iris_for_flux(
    fwhm: float,
    target_flux: float,
    cfg: SourceConfig,
    quadrature: QuadratureSpec,
    *,
    iris_center: float | None = None,
    lambda_center: float | None = None,
    rtol: float = DEFAULT_FLUX_RTOL,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> float:
    """Iris width (rad) giving ``target_flux`` behind a filter of width ``fwhm``.

    Args:
        fwhm (float): Filter FWHM in nm.
        target_flux (float): Required flux, arbitrary units, >= 0.
        cfg (SourceConfig): Source configuration.
        quadrature (QuadratureSpec): Flux quadrature settings.
        iris_center (float | None, optional): Iris center in rad. Defaults to
            the degenerate opening angle.
        lambda_center (float | None, optional): Filter center in nm. Defaults
            to the degenerate wavelength.
        rtol (float, optional): Relative flux tolerance.
        max_iterations (int, optional): Bisection iteration cap.

    Returns:
        float: Iris full width in rad.

    Raises:
        InfeasibleFluxError: If the target is outside the bracket's flux range.
    """
    if target_flux < 0:
        raise ValueError(f'target_flux must be >= 0, got {target_flux}')
    center = degenerate_opening_angle(cfg) if iris_center is None else iris_center
    filter = FilterConfig(
        lambda_center=cfg.lambda_degenerate
        if lambda_center is None
        else lambda_center,
        fwhm=fwhm,
    )
    lo, hi = iris_width_bracket(center, quadrature)
    if target_flux == 0:
        return lo
    if hi <= lo:
        raise InfeasibleFluxError(fwhm, target_flux, 'empty width bracket')

    def flux_gap(width: float) -> float:
        flux = integrated_flux(_arrangement(center, width, filter), cfg, quadrature)
        return flux - target_flux

    gap_hi = flux_gap(hi)
    if gap_hi < 0:
        raise InfeasibleFluxError(
            fwhm,
            target_flux,
            f'flux at the widest iris ({math.degrees(hi):.3f} deg) is '
            f'{gap_hi + target_flux:.6g}',
        )
    gap_lo = flux_gap(lo)
    if gap_lo > 0:
        raise InfeasibleFluxError(
            fwhm,
            target_flux,
            f'flux at the narrowest iris is already {gap_lo + target_flux:.6g}',
        )

    width, info = bisect(
        flux_gap,
        lo,
        hi,
        xtol=WIDTH_XTOL_RAD,
        maxiter=max_iterations,
        full_output=True,
        disp=False,
    )
    gap = flux_gap(width)
    logger.debug(
        'fwhm %.2f nm: width %.6f deg after %d iterations (relative gap %.2e)',
        fwhm,
        math.degrees(width),
        info.iterations,
        gap / target_flux,
    )
    if abs(gap) > rtol * target_flux:
        raise InfeasibleFluxError(
            fwhm,
            target_flux,
            f'bisection stopped at relative gap {gap / target_flux:.2e}',
        )
    return float(width)


def _curve_point(
    fwhm: float,
    target_flux: float,
    cfg: SourceConfig,
    quadrature: QuadratureSpec,
    iris_center: float,
    lambda_center: float,
    rtol: float,
    max_iterations: int,
    metric: str,
) -> WindowArrangement | None:
    try:
        width = solve_iris_for_flux(
            fwhm,
            target_flux,
            cfg,
            quadrature,
            iris_center=iris_center,
            lambda_center=lambda_center,
            rtol=rtol,
            max_iterations=max_iterations,
        )
    except InfeasibleFluxError as e:
        logger.warning(f'Omitting iso-flux point: {e}')
        return None
    arrangement = _arrangement(
        iris_center, width, FilterConfig(lambda_center=lambda_center, fwhm=fwhm)
    )
    flux = integrated_flux(arrangement, cfg, quadrature)
    phase_range = phase_range_metric(arrangement, cfg, quadrature, metric=metric)
    return replace(arrangement, flux=flux, phase_range=phase_range)


def build_iso_flux_curve(
    fwhm_values: list[float],
    target_flux: float,
    cfg: SourceConfig,
    quadrature: QuadratureSpec,
    *,
    iris_center: float | None = None,
    lambda_center: float | None = None,
    rtol: float = DEFAULT_FLUX_RTOL,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    metric: str = DEFAULT_PHASE_METRIC,
    max_workers: int = DEFAULT_MAX_WORKERS,
    progress: bool = False,
) -> IsoFluxCurve:
    """Solve one arrangement per FWHM at fixed flux and locate the optimum.

    Points are evaluated independently (in parallel when ``max_workers > 1``);
    the point order always follows ``fwhm_values``. Ties of the phase range go
    to the smaller FWHM.

    Raises:
        ValueError: If ``fwhm_values`` is empty or not strictly increasing.
        EmptyCurveError: If no FWHM yields a feasible arrangement.
    """
    fwhm_values = [float(f) for f in fwhm_values]
    if not fwhm_values:
        raise ValueError('fwhm_values must not be empty')
    if any(b <= a for a, b in zip(fwhm_values, fwhm_values[1:])):
        raise ValueError('fwhm_values must be strictly increasing')
    if not cfg.calibrated:
        logger.warning('Building an iso-flux curve with uncalibrated compensation')

    center = degenerate_opening_angle(cfg) if iris_center is None else iris_center
    lam_c = cfg.lambda_degenerate if lambda_center is None else lambda_center
    logger.info(
        'Iso-flux curve: %d fwhm values, target flux %.6g',
        len(fwhm_values),
        target_flux,
    )

    def evaluate(fwhm: float) -> WindowArrangement | None:
        return _curve_point(
            fwhm,
            target_flux,
            cfg,
            quadrature,
            center,
            lam_c,
            rtol,
            max_iterations,
            metric,
        )

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        results = list(
            tqdm(
                pool.map(evaluate, fwhm_values),
                total=len(fwhm_values),
                desc='iso-flux',
                disable=not progress,
            )
        )

    points = [p for p in results if p is not None]
    infeasible = [f for f, p in zip(fwhm_values, results) if p is None]
    if not points:
        raise EmptyCurveError(
            'empty iso-flux curve: no fwhm reaches target flux '
            f'{target_flux:.6g}'
        )

    optimum_index = 0
    for idx, point in enumerate(points):
        if point.phase_range < points[optimum_index].phase_range:
            optimum_index = idx

    curve = IsoFluxCurve(
        target_flux=target_flux,
        points=points,
        optimum_index=optimum_index,
        infeasible_fwhm=infeasible,
    )
    logger.info(
        'Iso-flux optimum: fwhm %.1f nm, iris %.4f deg, phase range %.4f rad',
        curve.optimum.filter.fwhm,
        math.degrees(curve.optimum.iris_width),
        curve.optimum.phase_range,
    )
    return curve


def find_optimal_window(
    reference: WindowArrangement,
    fwhm_values: list[float],
    cfg: SourceConfig,
    quadrature: QuadratureSpec,
    **curve_options: object,
) -> tuple[IsoFluxCurve, WindowArrangement]:
    """Optimal arrangement at the flux level of ``reference``.

    Args:
        reference (WindowArrangement): Arrangement that fixes the target flux.
        fwhm_values (list[float]): Scanned filter widths in nm.
        cfg (SourceConfig): Calibrated source configuration.
        quadrature (QuadratureSpec): Flux and phase-range settings.
        **curve_options: Forwarded to :func:`build_iso_flux_curve`.

    Returns:
        tuple[IsoFluxCurve, WindowArrangement]: The curve and its optimum.

    Raises:
        EmptyCurveError: If the reference has no flux or no point is feasible.
    """
    target_flux = integrated_flux(reference, cfg, quadrature)
    logger.info(
        'Reference window: fwhm %.1f nm, iris %.4f deg, flux %.6g',
        reference.filter.fwhm,
        math.degrees(reference.iris_width),
        target_flux,
    )
    if target_flux <= 0:
        raise EmptyCurveError(
            'empty iso-flux curve: reference arrangement carries no flux'
        )
    curve = build_iso_flux_curve(
        fwhm_values,
        target_flux,
        cfg,
        quadrature,
        iris_center=reference.iris_center,
        lambda_center=reference.filter.lambda_center,
        **curve_options,
    )
    return curve, curve.optimum
