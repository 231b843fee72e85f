"""Domain types of the two-crystal source model.

Internal units are radians and micrometres for angles and lengths, with
wavelengths kept in nanometres on the mode/filter level (they are converted
to micrometres inside the physics functions).
"""

import math
import logging
from dataclasses import field, dataclass

import numpy as np
import pandas as pd

from spdcwindow.config.settings import (
    DEFAULT_PHI_0_RAD,
    DEFAULT_CRYSTAL_ORDER,
    SUPPORTED_CRYSTAL_ORDERS,
)

__all__ = [
    'SellmeierModel',
    'SourceConfig',
    'EmissionMode',
    'FilterConfig',
    'GridSpec',
    'QuadratureSpec',
    'ModeGrid',
    'WindowArrangement',
    'IsoFluxCurve',
]

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


# ---------------------------------------------------------------- #
# ---------          CLASSES related to the crystal      --------- #
# ---------------------------------------------------------------- #
@dataclass(frozen=True)
class SellmeierModel:
    """Two-branch Sellmeier model of a uniaxial crystal.

    ``n^2 = a + b / (lambda^2 - c) - d * lambda^2`` for each of the ordinary
    and extraordinary principal indices, with lambda in um.
    """

    a_o: float
    b_o: float
    c_o: float
    d_o: float
    a_e: float
    b_e: float
    c_e: float
    d_e: float
    lambda_min: float
    lambda_max: float

    def __post_init__(self) -> None:
        if not 0 < self.lambda_min < self.lambda_max:
            raise ValueError(
                'Dispersion validity range must satisfy 0 < lambda_min < lambda_max, '
                f'got [{self.lambda_min}, {self.lambda_max}]'
            )
        lambda_min_sq = self.lambda_min**2
        for branch, c in (('ordinary', self.c_o), ('extraordinary', self.c_e)):
            if c >= lambda_min_sq:
                raise ValueError(
                    f'Sellmeier pole of the {branch} branch (c={c}) lies inside '
                    f'the validity range (lambda_min^2={lambda_min_sq:.6g})'
                )
        probe = np.linspace(self.lambda_min, self.lambda_max, 257)
        for branch, coeffs in (
            ('ordinary', (self.a_o, self.b_o, self.c_o, self.d_o)),
            ('extraordinary', (self.a_e, self.b_e, self.c_e, self.d_e)),
        ):
            a, b, c, d = coeffs
            n_sq = a + b / (probe**2 - c) - d * probe**2
            if np.any(n_sq <= 0):
                raise ValueError(
                    f'Squared {branch} index is not positive over the validity range'
                )


# ---------------------------------------------------------------- #
# ---------          CLASSES related to the source       --------- #
# ---------------------------------------------------------------- #
@dataclass(frozen=True)
class SourceConfig:
    """Geometry of the two-crystal source and its compensation elements.

    Attributes:
        lambda_pump (float): Pump vacuum wavelength in nm.
        crystal_length_d (float): Length of each down-conversion crystal in um.
        cut_angle (float): Optic-axis inclination to the crystal normal in rad.
        sellmeier (SellmeierModel): Dispersion of crystal and compensators.
        comp_thickness (float): Compensation element thickness per arm in um.
        comp_cut_angle (float): Compensation optic-axis inclination in rad.
        comp_tilt (float): Tunable offset added to ``comp_cut_angle`` in rad.
        phi_0 (float): Initial phase difference of the pump components in rad.
        crystal_order (str): ``vv_first`` when the first crystal emits the VV pair.
        calibrated (bool): Set by the compensation calibration.
    """

    lambda_pump: float
    crystal_length_d: float
    cut_angle: float
    sellmeier: SellmeierModel
    comp_thickness: float = 0.0
    comp_cut_angle: float = 0.0
    comp_tilt: float = 0.0
    phi_0: float = DEFAULT_PHI_0_RAD
    crystal_order: str = DEFAULT_CRYSTAL_ORDER
    calibrated: bool = False

    def __post_init__(self) -> None:
        if self.lambda_pump <= 0:
            raise ValueError(f'lambda_pump must be > 0, got {self.lambda_pump}')
        if self.crystal_length_d <= 0:
            raise ValueError(
                f'crystal_length_d must be > 0, got {self.crystal_length_d}'
            )
        if not 0 < self.cut_angle < math.pi / 2:
            raise ValueError(
                f'cut_angle must lie in (0, pi/2), got {self.cut_angle}'
            )
        if self.comp_thickness < 0:
            raise ValueError(
                f'comp_thickness must be >= 0, got {self.comp_thickness}'
            )
        if self.crystal_order not in SUPPORTED_CRYSTAL_ORDERS:
            raise ValueError(
                f'crystal_order must be one of {SUPPORTED_CRYSTAL_ORDERS}, '
                f'got {self.crystal_order!r}'
            )

    @property
    def lambda_degenerate(self) -> float:
        """Degenerate signal wavelength in nm."""
        return 2.0 * self.lambda_pump

    @property
    def comp_axis_angle(self) -> float:
        """Compensation optic-axis angle from the element normal in rad."""
        return self.comp_cut_angle + self.comp_tilt

    @property
    def phase_sign(self) -> float:
        """Sign of the VV-relative-to-HH phase for the configured ordering."""
        return 1.0 if self.crystal_order == 'vv_first' else -1.0


@dataclass(frozen=True)
class EmissionMode:
    """One detection mode of the signal photon.

    Attributes:
        theta_ext (float): External polar angle in rad.
        phi (float): Azimuth in rad.
        lambda_s (float): Vacuum wavelength in nm.
    """

    theta_ext: float
    phi: float
    lambda_s: float

    def __post_init__(self) -> None:
        if not 0 <= self.theta_ext < math.pi / 2:
            raise ValueError(
                f'theta_ext must lie in [0, pi/2), got {self.theta_ext}'
            )
        if self.lambda_s <= 0:
            raise ValueError(f'lambda_s must be > 0, got {self.lambda_s}')


# ---------------------------------------------------------------- #
# ---------      CLASSES related to windows and maps     --------- #
# ---------------------------------------------------------------- #
@dataclass(frozen=True)
class FilterConfig:
    """Gaussian interference filter, both values in nm."""

    lambda_center: float
    fwhm: float

    def __post_init__(self) -> None:
        if self.fwhm <= 0:
            raise ValueError(f'fwhm must be > 0, got {self.fwhm}')
        if self.lambda_center <= 0:
            raise ValueError(
                f'lambda_center must be > 0, got {self.lambda_center}'
            )


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (angle x wavelength) cell grid; angles in rad, wavelengths in nm."""

    theta_min: float
    theta_max: float
    lambda_min: float
    lambda_max: float
    n_theta: int
    n_lambda: int

    def __post_init__(self) -> None:
        if self.n_theta < 2 or self.n_lambda < 2:
            raise ValueError(
                f'Grid needs at least 2 cells per axis, got '
                f'{self.n_theta} x {self.n_lambda}'
            )
        if not 0 <= self.theta_min < self.theta_max < math.pi / 2:
            raise ValueError(
                f'Angle bounds must satisfy 0 <= min < max < pi/2, got '
                f'[{self.theta_min}, {self.theta_max}]'
            )
        if not 0 < self.lambda_min < self.lambda_max:
            raise ValueError(
                f'Wavelength bounds must satisfy 0 < min < max, got '
                f'[{self.lambda_min}, {self.lambda_max}]'
            )

    def theta_centers(self) -> np.ndarray:
        step = (self.theta_max - self.theta_min) / self.n_theta
        return self.theta_min + (np.arange(self.n_theta) + 0.5) * step

    def lambda_centers(self) -> np.ndarray:
        step = (self.lambda_max - self.lambda_min) / self.n_lambda
        return self.lambda_min + (np.arange(self.n_lambda) + 0.5) * step


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution settings of the flux integral and phase-range sampling.

    Attributes:
        theta_min (float): Lowest admissible window edge in rad.
        theta_max (float): Highest admissible window edge in rad.
        lambda_min (float): Lower edge of the modeled band in nm.
        lambda_max (float): Upper edge of the modeled band in nm.
        n_lambda (int): Midpoint cells across the band.
        max_theta_step (float): Largest angular cell in rad.
        region_points (int): Samples per axis of a phase-range region.
    """

    theta_min: float
    theta_max: float
    lambda_min: float
    lambda_max: float
    n_lambda: int
    max_theta_step: float
    region_points: int

    def __post_init__(self) -> None:
        if self.n_lambda < 1:
            raise ValueError(f'n_lambda must be >= 1, got {self.n_lambda}')
        if self.max_theta_step <= 0:
            raise ValueError(
                f'max_theta_step must be > 0, got {self.max_theta_step}'
            )
        if self.region_points < 2:
            raise ValueError(
                f'region_points must be >= 2, got {self.region_points}'
            )


@dataclass
class ModeGrid:
    """Probability and residual-phase maps on a :class:`GridSpec`.

    Arrays are indexed ``[i_theta, j_lambda]``; absent phases are ``NaN``.
    """

    spec: GridSpec
    values_P: np.ndarray
    values_phi: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.spec.n_theta, self.spec.n_lambda)
        if self.values_P.shape != shape or self.values_phi.shape != shape:
            raise ValueError(
                f'Map arrays must have shape {shape}, got '
                f'{self.values_P.shape} and {self.values_phi.shape}'
            )

    @property
    def theta_min(self) -> float:
        return self.spec.theta_min

    @property
    def theta_max(self) -> float:
        return self.spec.theta_max

    @property
    def lambda_min(self) -> float:
        return self.spec.lambda_min

    @property
    def lambda_max(self) -> float:
        return self.spec.lambda_max

    @property
    def n_theta(self) -> int:
        return self.spec.n_theta

    @property
    def n_lambda(self) -> int:
        return self.spec.n_lambda

    def peak_location(self) -> tuple[float, float]:
        """Return ``(theta_rad, lambda_nm)`` of the highest-probability cell."""
        i, j = np.unravel_index(int(np.argmax(self.values_P)), self.values_P.shape)
        return (
            float(self.spec.theta_centers()[i]),
            float(self.spec.lambda_centers()[j]),
        )

    def to_frame(self) -> pd.DataFrame:
        """Return the maps as rows ordered by wavelength, then angle.

        Returns:
            pd.DataFrame: Columns ``theta_deg, lambda_nm, P, phi_rad``.
        """
        theta_deg = np.degrees(self.spec.theta_centers())
        lambda_nm = self.spec.lambda_centers()
        # lambda is the slow index, theta the fast one
        return pd.DataFrame(
            {
                'theta_deg': np.tile(theta_deg, self.n_lambda),
                'lambda_nm': np.repeat(lambda_nm, self.n_theta),
                'P': self.values_P.T.ravel(),
                'phi_rad': self.values_phi.T.ravel(),
            }
        )


@dataclass(frozen=True)
class WindowArrangement:
    """Iris (annulus around the cone) plus spectral filter.

    Attributes:
        iris_center (float): Cone angle the iris is centered on, rad.
        iris_width (float): Full angular width of the iris, rad.
        filter (FilterConfig): Spectral filter in front of both detectors.
        flux (float | None): Integrated pair flux, arbitrary units.
        phase_range (float | None): Residual-phase metric over the window, rad.
    """

    iris_center: float
    iris_width: float
    filter: FilterConfig
    flux: float | None = None
    phase_range: float | None = None

    def __post_init__(self) -> None:
        if self.iris_width <= 0:
            raise ValueError(f'iris_width must be > 0, got {self.iris_width}')
        # tolerate round-off when the window is opened to its full bracket
        if self.iris_center - self.iris_width / 2 < -1e-12:
            raise ValueError(
                'Iris window extends below the pump axis: '
                f'center {self.iris_center}, width {self.iris_width}'
            )
        if self.flux is not None and self.flux < 0:
            raise ValueError(f'flux must be >= 0, got {self.flux}')
        if self.phase_range is not None and self.phase_range < 0:
            raise ValueError(
                f'phase_range must be >= 0, got {self.phase_range}'
            )

    @property
    def theta_bounds(self) -> tuple[float, float]:
        half = self.iris_width / 2
        return max(self.iris_center - half, 0.0), self.iris_center + half


@dataclass
class IsoFluxCurve:
    """Arrangements sharing one target flux, ordered by filter FWHM."""

    target_flux: float
    points: list[WindowArrangement]
    optimum_index: int
    infeasible_fwhm: list[float] = field(default_factory=list)

    @property
    def optimum(self) -> WindowArrangement:
        return self.points[self.optimum_index]

    def to_frame(self) -> pd.DataFrame:
        """Return the curve in the ``isoflux.csv`` column layout."""
        return pd.DataFrame(
            {
                'fwhm_nm': [p.filter.fwhm for p in self.points],
                'iris_width_deg': [
                    math.degrees(p.iris_width) for p in self.points
                ],
                'iris_center_deg': [
                    math.degrees(p.iris_center) for p in self.points
                ],
                'flux': [p.flux for p in self.points],
                'phase_range_rad': [p.phase_range for p in self.points],
                'is_optimum': [
                    idx == self.optimum_index
                    for idx in range(len(self.points))
                ],
            }
        )
