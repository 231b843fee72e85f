"""Client interface for the two-crystal source model.

``ClientSource`` bundles a validated run configuration with the physics and
optimizer modules, one method per command-line subcommand.

Example:
    >>> client = ClientSource.from_file(None, overrides=['grid.n_theta=64'])
    >>> report = client.phasematch()
    >>> 2.5 < report['opening_angle_external_deg'] < 3.3
    True
"""

import math
import logging
from typing import Any
from pathlib import Path
from dataclasses import replace
from functools import cached_property

from spdcwindow.loader import RunConfig, load_config
from spdcwindow.models import ModeGrid, IsoFluxCurve, SourceConfig, WindowArrangement
from spdcwindow.exceptions import ConfigurationError
from spdcwindow.emission_maps import (
    compute_maps,
    integrated_flux,
    phase_range_metric,
)
from spdcwindow.window_optimizer import find_optimal_window
from spdcwindow.utils.numeric_utils import nm_to_um
from spdcwindow.physics.spdc_model import (
    delta_kappa_array,
    collinear_cut_angle,
    calibrate_compensation,
    internal_opening_angle,
    degenerate_opening_angle,
)
from spdcwindow.physics.crystal_optics import (
    index_ordinary,
    index_extraordinary,
    index_extraordinary_principal,
)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

__all__ = [
    'ClientSource',
    'arrangement_summary',
]


def arrangement_summary(arr: WindowArrangement) -> dict[str, Any]:
    """JSON-ready view of an arrangement in external units."""
    return {
        'fwhm_nm': arr.filter.fwhm,
        'lambda_center_nm': arr.filter.lambda_center,
        'iris_center_deg': math.degrees(arr.iris_center),
        'iris_width_deg': math.degrees(arr.iris_width),
        'flux': arr.flux,
        'phase_range_rad': arr.phase_range,
    }


# --------------------------------------------- #
# ----          Client for the source       --- #
# --------------------------------------------- #
class ClientSource:
    """Phase-matching report, emission maps and window optimization.

    Example:
        >>> client = ClientSource()
        >>> round(client.phasematch()['lambda_degenerate_nm'], 1)
        702.2
    """

    def __init__(
        self, run_config: RunConfig | None = None, progress: bool = False
    ) -> None:
        """Initialize the ClientSource.

        Args:
            run_config (RunConfig | None, optional): Validated configuration.
                Defaults to the reference setup.
            progress (bool, optional): Show a progress bar while building the
                iso-flux curve. Defaults to False.
        """
        self._run_config = run_config if run_config is not None else RunConfig()
        self._progress = progress

    @classmethod
    def from_file(
        cls,
        path: str | Path | None,
        overrides: list[str] | None = None,
        progress: bool = False,
    ) -> 'ClientSource':
        """Build a client from a JSON configuration file and overrides."""
        return cls(load_config(path, overrides), progress=progress)

    @property
    def run_config(self) -> RunConfig:
        return self._run_config

    @cached_property
    def source_config(self) -> SourceConfig:
        """Source configuration as configured, before calibration."""
        return self._run_config.source_config()

    @cached_property
    def calibrated_config(self) -> SourceConfig:
        """Source configuration with the compensation tuned.

        With ``compensation.calibrate`` disabled the configured tilt and
        ``phi_0`` are used unchanged.
        """
        if not self._run_config.compensation.calibrate:
            logger.info('Compensation calibration disabled by configuration')
            return self.source_config
        return calibrate_compensation(self.source_config)

    # ---- phasematch
    def phasematch(self) -> dict[str, Any]:
        """Indices, degenerate opening angle and collinear mismatch.

        Returns:
            dict[str, Any]: Report in external units.

        Raises:
            ConfigurationError: If degenerate emission is not phase-matchable.
        """
        cfg = self.source_config
        model = cfg.sellmeier
        lam_p = float(nm_to_um(cfg.lambda_pump))
        lam_d = float(nm_to_um(cfg.lambda_degenerate))

        try:
            collinear_cut_deg = math.degrees(collinear_cut_angle(cfg))
        except ConfigurationError as e:
            logger.warning(f'No collinear cut angle: {e}')
            collinear_cut_deg = None

        report = {
            'lambda_pump_nm': cfg.lambda_pump,
            'lambda_degenerate_nm': cfg.lambda_degenerate,
            'cut_angle_deg': math.degrees(cfg.cut_angle),
            'n_o_pump': index_ordinary(lam_p, model),
            'n_e_principal_pump': index_extraordinary_principal(lam_p, model),
            'n_e_pump_at_cut_angle': index_extraordinary(
                lam_p, cfg.cut_angle, model
            ),
            'n_o_degenerate': index_ordinary(lam_d, model),
            'n_e_principal_degenerate': index_extraordinary_principal(
                lam_d, model
            ),
            'delta_kappa_collinear_rad_per_um': float(
                delta_kappa_array(0.0, cfg.lambda_degenerate, cfg)
            ),
            'collinear_cut_angle_deg': collinear_cut_deg,
            'opening_angle_external_deg': math.degrees(
                degenerate_opening_angle(cfg)
            ),
            'opening_angle_internal_deg': math.degrees(
                internal_opening_angle(cfg)
            ),
        }
        logger.info(
            'Degenerate opening angle %.4f deg (internal %.4f deg)',
            report['opening_angle_external_deg'],
            report['opening_angle_internal_deg'],
        )
        return report

    # ---- maps
    def maps(self) -> tuple[ModeGrid, dict[str, Any]]:
        """Probability and residual-phase maps plus their metadata.

        Returns:
            tuple[ModeGrid, dict[str, Any]]: The maps and the metadata document.
        """
        cfg = self.calibrated_config
        grid = self._run_config.grid_spec()
        filter = self._run_config.filter_config()
        maps = compute_maps(grid, cfg, filter)
        peak_theta, peak_lambda = maps.peak_location()
        meta = {
            'grid': {
                'theta_min_deg': self._run_config.grid.theta_min_deg,
                'theta_max_deg': self._run_config.grid.theta_max_deg,
                'lambda_min_nm': grid.lambda_min,
                'lambda_max_nm': grid.lambda_max,
                'n_theta': grid.n_theta,
                'n_lambda': grid.n_lambda,
            },
            'filter': {
                'lambda_center_nm': filter.lambda_center,
                'fwhm_nm': filter.fwhm,
            },
            'calibrated': cfg.calibrated,
            'comp_tilt_deg': math.degrees(cfg.comp_tilt),
            'phi_0_rad': cfg.phi_0,
            'opening_angle_external_deg': math.degrees(
                degenerate_opening_angle(cfg)
            ),
            'peak': {
                'theta_deg': math.degrees(peak_theta),
                'lambda_nm': peak_lambda,
            },
        }
        return maps, meta

    # ---- optimize
    def reference_arrangement(self) -> WindowArrangement:
        """Configured reference, centered on the degenerate emission cone."""
        cfg = self.calibrated_config
        return self._run_config.reference_arrangement(
            degenerate_opening_angle(cfg)
        )

    def optimize(
        self,
    ) -> tuple[IsoFluxCurve, WindowArrangement, dict[str, Any]]:
        """Iso-flux curve at the reference flux and its optimal arrangement.

        Returns:
            tuple[IsoFluxCurve, WindowArrangement, dict[str, Any]]: The curve,
            the optimum and the ``optimum.json`` document.

        Raises:
            EmptyCurveError: If no scanned FWHM reaches the reference flux.
        """
        cfg = self.calibrated_config
        options = self._run_config.optimize
        quadrature = self._run_config.quadrature_spec()
        reference = self.reference_arrangement()

        curve, optimum = find_optimal_window(
            reference,
            options.fwhm_values(),
            cfg,
            quadrature,
            rtol=options.flux_rtol,
            max_iterations=options.max_iterations,
            metric=options.phase_metric,
            max_workers=options.max_workers,
            progress=self._progress,
        )
        reference = replace(
            reference,
            flux=curve.target_flux,
            phase_range=phase_range_metric(
                reference, cfg, quadrature, metric=options.phase_metric
            ),
        )
        summary = {
            'optimum': arrangement_summary(optimum),
            'reference': arrangement_summary(reference),
            'target_flux': curve.target_flux,
            'phase_metric': options.phase_metric,
            'n_feasible': len(curve.points),
            'n_infeasible': len(curve.infeasible_fwhm),
            'infeasible_fwhm_nm': list(curve.infeasible_fwhm),
            'comp_tilt_deg': math.degrees(cfg.comp_tilt),
            'phi_0_rad': cfg.phi_0,
        }
        return curve, optimum, summary

    def flux(self, arr: WindowArrangement) -> float:
        """Integrated flux of ``arr`` under this configuration."""
        return integrated_flux(
            arr, self.calibrated_config, self._run_config.quadrature_spec()
        )
