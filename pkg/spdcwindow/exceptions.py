"""Exception hierarchy for spdcwindow.

Library code raises these; the command line maps them to exit codes.
"""

__all__ = [
    'SpdcWindowError',
    'DispersionRangeError',
    'EvanescentModeError',
    'ConfigurationError',
    'ConfigParseError',
    'ConfigValidationError',
    'OutputError',
    'InfeasibleFluxError',
    'EmptyCurveError',
]


class SpdcWindowError(Exception):
    """Base class of all errors raised by spdcwindow."""


class DispersionRangeError(SpdcWindowError, ValueError):
    """A wavelength lies outside the validity range of the dispersion model."""

    def __init__(
        self, lambda_um: float, lambda_min_um: float, lambda_max_um: float
    ) -> None:
        self.lambda_um = lambda_um
        self.lambda_min_um = lambda_min_um
        self.lambda_max_um = lambda_max_um
        super().__init__(
            f'Wavelength {lambda_um:.6g} um outside dispersion validity '
            f'range [{lambda_min_um:.6g}, {lambda_max_um:.6g}] um'
        )


class EvanescentModeError(SpdcWindowError, ValueError):
    """Transverse wavevector exceeds the wavevector magnitude."""


class ConfigurationError(SpdcWindowError, ValueError):
    """A physically or numerically unusable configuration."""


class ConfigParseError(SpdcWindowError):
    """The configuration document could not be parsed."""


class ConfigValidationError(SpdcWindowError, ValueError):
    """A configuration value violates a constraint.

    Attributes:
        key_path (str): Dotted path of the offending key, e.g. ``source.lambda_pump_nm``.
        constraint (str): Human readable constraint that failed.
    """

    def __init__(self, key_path: str, constraint: str) -> None:
        self.key_path = key_path
        self.constraint = constraint
        super().__init__(f'{key_path}: {constraint}')


class OutputError(SpdcWindowError, OSError):
    """An output artifact could not be written."""


class InfeasibleFluxError(SpdcWindowError, ValueError):
    """The target flux cannot be reached inside the iris-width bracket."""

    def __init__(self, fwhm_nm: float, target_flux: float, reason: str) -> None:
        self.fwhm_nm = fwhm_nm
        self.target_flux = target_flux
        super().__init__(
            f'infeasible fwhm {fwhm_nm:g} nm for target flux '
            f'{target_flux:.6g}: {reason}'
        )


class EmptyCurveError(SpdcWindowError, RuntimeError):
    """No scanned fwhm value produced a feasible iso-flux arrangement."""
