"""Small numeric helpers shared by the physics and quadrature code."""

import math
import logging

import numpy as np

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

NM_PER_UM = 1e3


def nm_to_um(lambda_nm: float | np.ndarray) -> float | np.ndarray:
    """Convert a vacuum wavelength from nm to um."""
    return np.asarray(lambda_nm, dtype=float) / NM_PER_UM


def as_scalar(value: np.ndarray) -> float | np.ndarray:
    """Return a Python float for 0-d results, the array otherwise."""
    return float(value) if np.ndim(value) == 0 else value


def sinc(x: float | np.ndarray) -> float | np.ndarray:
    """Unnormalized sinc, ``sin(x)/x`` with ``sinc(0) = 1``."""
    return as_scalar(np.sinc(np.asarray(x, dtype=float) / np.pi))


def compensated_sum(values: np.ndarray) -> float:
    """Order-fixed, error-compensated sum of a 1-D or 2-D array.

    Rows are reduced with numpy's pairwise summation, the row totals with
    ``math.fsum`` (exactly rounded).
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim <= 1:
        return math.fsum(arr.ravel().tolist())
    row_totals = np.sum(arr, axis=-1).ravel()
    return math.fsum(row_totals.tolist())
