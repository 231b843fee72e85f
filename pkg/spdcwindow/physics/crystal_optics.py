"""Uniaxial-crystal dispersion and ray geometry.

All functions accept scalars or numpy arrays (broadcast elementwise) and
return a float for scalar input. Wavelengths are vacuum wavelengths in um,
angles in rad, wavevectors in rad/um.

Example:
    >>> from spdcwindow.physics.crystal_optics import index_ordinary, kato_bbo
    >>> round(index_ordinary(0.7022, kato_bbo()), 4)
    1.664
"""

import logging

import numpy as np

from spdcwindow.models import SellmeierModel
from spdcwindow.exceptions import DispersionRangeError, EvanescentModeError
from spdcwindow.config.settings import KATO_BBO_COEFFICIENTS
from spdcwindow.utils.numeric_utils import as_scalar

__all__ = [
    'kato_bbo',
    'index_ordinary',
    'index_extraordinary_principal',
    'index_extraordinary',
    'wavevector_magnitude',
    'refract_external_to_internal',
    'longitudinal_component',
]

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


def kato_bbo() -> SellmeierModel:
    """Return the default BBO dispersion model."""
    coeffs = dict(KATO_BBO_COEFFICIENTS)
    return SellmeierModel(
        a_o=coeffs['a_o'],
        b_o=coeffs['b_o'],
        c_o=coeffs['c_o'],
        d_o=coeffs['d_o'],
        a_e=coeffs['a_e'],
        b_e=coeffs['b_e'],
        c_e=coeffs['c_e'],
        d_e=coeffs['d_e'],
        lambda_min=coeffs['lambda_min_um'],
        lambda_max=coeffs['lambda_max_um'],
    )


def _check_range(lambda_vac: np.ndarray, model: SellmeierModel) -> None:
    bad = ~(
        (lambda_vac >= model.lambda_min) & (lambda_vac <= model.lambda_max)
    )
    if np.any(bad):
        offending = float(np.atleast_1d(lambda_vac)[np.atleast_1d(bad)][0])
        logger.error(
            'Dispersion evaluated outside [%g, %g] um at %g um',
            model.lambda_min,
            model.lambda_max,
            offending,
        )
        raise DispersionRangeError(
            offending, model.lambda_min, model.lambda_max
        )


def _sellmeier(
    lambda_vac: float | np.ndarray,
    model: SellmeierModel,
    coeffs: tuple[float, float, float, float],
) -> np.ndarray:
    lam = np.asarray(lambda_vac, dtype=float)
    _check_range(lam, model)
    a, b, c, d = coeffs
    lam_sq = lam * lam
    return np.sqrt(a + b / (lam_sq - c) - d * lam_sq)


def index_ordinary(
    lambda_vac: float | np.ndarray, model: SellmeierModel
) -> float | np.ndarray:
    """Ordinary principal index ``n_o``.

    Args:
        lambda_vac (float | np.ndarray): Vacuum wavelength in um.
        model (SellmeierModel): Dispersion model.

    Returns:
        float | np.ndarray: Refractive index.

    Raises:
        DispersionRangeError: If a wavelength is outside the validity range.
    """
    return as_scalar(
        _sellmeier(
            lambda_vac, model, (model.a_o, model.b_o, model.c_o, model.d_o)
        )
    )


def index_extraordinary_principal(
    lambda_vac: float | np.ndarray, model: SellmeierModel
) -> float | np.ndarray:
    """Extraordinary principal index ``n_e`` (wavevector normal to the optic axis)."""
    return as_scalar(
        _sellmeier(
            lambda_vac, model, (model.a_e, model.b_e, model.c_e, model.d_e)
        )
    )


def index_extraordinary(
    lambda_vac: float | np.ndarray,
    theta_axis: float | np.ndarray,
    model: SellmeierModel,
) -> float | np.ndarray:
    """Extraordinary index for a wavevector at ``theta_axis`` from the optic axis.

    ``1/n^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2``.

    Args:
        lambda_vac (float | np.ndarray): Vacuum wavelength in um.
        theta_axis (float | np.ndarray): Angle to the optic axis, in [0, pi/2].
        model (SellmeierModel): Dispersion model.

    Returns:
        float | np.ndarray: Refractive index.

    Raises:
        ValueError: If an angle lies outside [0, pi/2].
        DispersionRangeError: If a wavelength is outside the validity range.
    """
    theta = np.asarray(theta_axis, dtype=float)
    if np.any((theta < 0) | (theta > np.pi / 2)):
        raise ValueError(
            'Angle to the optic axis must lie in [0, pi/2], got '
            f'[{float(np.min(theta))}, {float(np.max(theta))}]'
        )
    n_o = _sellmeier(
        lambda_vac, model, (model.a_o, model.b_o, model.c_o, model.d_o)
    )
    n_e = _sellmeier(
        lambda_vac, model, (model.a_e, model.b_e, model.c_e, model.d_e)
    )
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    inv_sq = (cos_t * cos_t) / (n_o * n_o) + (sin_t * sin_t) / (n_e * n_e)
    return as_scalar(1.0 / np.sqrt(inv_sq))


def wavevector_magnitude(
    lambda_vac: float | np.ndarray, n: float | np.ndarray
) -> float | np.ndarray:
    """Return ``k = 2 pi n / lambda`` in rad/um."""
    lam = np.asarray(lambda_vac, dtype=float)
    if np.any(lam <= 0):
        raise ValueError('Wavelength must be > 0')
    return as_scalar(2.0 * np.pi * np.asarray(n, dtype=float) / lam)


def refract_external_to_internal(
    theta_ext: float | np.ndarray, n: float | np.ndarray
) -> float | np.ndarray:
    """Snell refraction from air into a medium of index ``n >= 1``."""
    theta = np.asarray(theta_ext, dtype=float)
    if np.any((theta < 0) | (theta >= np.pi / 2)):
        raise ValueError('External angle must lie in [0, pi/2)')
    return as_scalar(np.arcsin(np.sin(theta) / np.asarray(n, dtype=float)))


def longitudinal_component(
    k: float | np.ndarray, q_magnitude: float | np.ndarray
) -> float | np.ndarray:
    """Return ``k_z = sqrt(k^2 - q^2)``.

    Raises:
        EvanescentModeError: If any transverse component exceeds ``k``.
    """
    k_arr = np.asarray(k, dtype=float)
    q_arr = np.asarray(q_magnitude, dtype=float)
    if np.any(q_arr > k_arr):
        raise EvanescentModeError(
            'Transverse wavevector exceeds the wavevector magnitude '
            '(evanescent mode); exclude this grid point'
        )
    return as_scalar(np.sqrt((k_arr - q_arr) * (k_arr + q_arr)))
