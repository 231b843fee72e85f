import math
from dataclasses import replace

import numpy as np
import pytest

from spdcwindow.models import SellmeierModel
from spdcwindow.exceptions import DispersionRangeError, EvanescentModeError
from spdcwindow.physics.crystal_optics import (
    kato_bbo,
    index_ordinary,
    index_extraordinary,
    wavevector_magnitude,
    longitudinal_component,
    refract_external_to_internal,
    index_extraordinary_principal,
)


# -----------------------------------
# ----      PyTest Fixtures      ----
# -----------------------------------
@pytest.fixture
def bbo():
    return kato_bbo()


@pytest.fixture
def vacuum_like(bbo):
    return replace(bbo, a_o=1.0, b_o=0.0, d_o=0.0, a_e=1.0, b_e=0.0, d_e=0.0)


# -----------------------------------
# ----         Unit Tests        ----
# -----------------------------------


# ---- Class: SellmeierModel
def test_sellmeier_rejects_inverted_range(bbo):
    with pytest.raises(ValueError):
        replace(bbo, lambda_min=1.0, lambda_max=0.5)


def test_sellmeier_rejects_pole_inside_range(bbo):
    with pytest.raises(ValueError, match='pole'):
        replace(bbo, c_o=0.06)


def test_sellmeier_rejects_negative_squared_index(bbo):
    with pytest.raises(ValueError, match='not positive'):
        replace(bbo, a_e=-5.0)


# ---- Function: index_ordinary()
@pytest.mark.parametrize(
    'lambda_um, expected',
    [(0.3511, 1.7068), (0.7022, 1.6640)],
)
def test_index_ordinary_kato_values(bbo, lambda_um, expected):
    assert index_ordinary(lambda_um, bbo) == pytest.approx(expected, abs=5e-4)


def test_index_ordinary_vacuum_identity(vacuum_like):
    assert index_ordinary(0.7022, vacuum_like) == 1.0


def test_index_ordinary_out_of_range_names_value(bbo):
    with pytest.raises(DispersionRangeError, match='1.2'):
        index_ordinary(1.2, bbo)


def test_index_ordinary_vectorized(bbo):
    lambdas = np.array([0.3511, 0.7022])
    values = index_ordinary(lambdas, bbo)
    assert values.shape == (2,)
    assert values[0] > values[1] > 1.0


def test_scalar_input_returns_float(bbo):
    assert isinstance(index_ordinary(0.5, bbo), float)


# ---- Function: index_extraordinary_principal()
@pytest.mark.parametrize(
    'lambda_um, expected',
    [(0.3511, 1.5774), (0.7022, 1.5471)],
)
def test_index_extraordinary_principal_kato_values(bbo, lambda_um, expected):
    assert index_extraordinary_principal(lambda_um, bbo) == pytest.approx(
        expected, abs=5e-4
    )


def test_extraordinary_equals_ordinary_for_equal_coefficients(bbo):
    symmetric = replace(
        bbo, a_e=bbo.a_o, b_e=bbo.b_o, c_e=bbo.c_o, d_e=bbo.d_o
    )
    lambdas = np.linspace(0.25, 1.0, 11)
    np.testing.assert_array_equal(
        index_extraordinary_principal(lambdas, symmetric),
        index_ordinary(lambdas, symmetric),
    )


# ---- Function: index_extraordinary()
def test_index_extraordinary_on_axis_is_ordinary(bbo):
    lambdas = np.linspace(0.25, 1.0, 7)
    np.testing.assert_allclose(
        index_extraordinary(lambdas, 0.0, bbo),
        index_ordinary(lambdas, bbo),
        rtol=1e-14,
    )


def test_index_extraordinary_perpendicular_is_principal(bbo):
    assert index_extraordinary(0.5, math.pi / 2, bbo) == pytest.approx(
        index_extraordinary_principal(0.5, bbo), rel=1e-14
    )


def test_index_extraordinary_at_cut_angle(bbo):
    value = index_extraordinary(0.3511, math.radians(33.9), bbo)
    assert value == pytest.approx(1.6631, abs=5e-4)


def test_index_extraordinary_monotone_in_angle(bbo):
    angles = np.linspace(0.0, math.pi / 2, 50)
    values = index_extraordinary(0.3511, angles, bbo)
    # BBO is negative uniaxial, the index falls from n_o to n_e
    assert np.all(np.diff(values) < 0)


def test_index_extraordinary_rejects_angle_out_of_range(bbo):
    with pytest.raises(ValueError):
        index_extraordinary(0.5, -0.1, bbo)


# ---- Function: wavevector_magnitude()
@pytest.mark.parametrize(
    'lambda_um, expected',
    [(1.0, 2 * math.pi), (0.5, 4 * math.pi)],
)
def test_wavevector_magnitude_vacuum(lambda_um, expected):
    assert wavevector_magnitude(lambda_um, 1.0) == pytest.approx(expected)


def test_wavevector_magnitude_pump():
    assert wavevector_magnitude(0.3511, 1.6631) == pytest.approx(29.77, abs=0.01)


def test_wavevector_magnitude_rejects_non_positive_wavelength():
    with pytest.raises(ValueError):
        wavevector_magnitude(0.0, 1.0)


# ---- Function: refract_external_to_internal()
def test_refraction_at_normal_incidence():
    assert refract_external_to_internal(0.0, 1.66) == 0.0


def test_refraction_identity_medium():
    assert refract_external_to_internal(0.3, 1.0) == pytest.approx(0.3)


def test_refraction_value():
    theta = refract_external_to_internal(math.radians(3.0), 1.6640)
    assert math.degrees(theta) == pytest.approx(1.803, abs=1e-3)


def test_refraction_monotonicity():
    angles = np.linspace(0.0, 1.0, 20)
    internal = refract_external_to_internal(angles, 1.6)
    assert np.all(np.diff(internal) > 0)
    assert np.all(internal <= angles)
    assert refract_external_to_internal(0.2, 1.7) < refract_external_to_internal(
        0.2, 1.5
    )


def test_refraction_rejects_grazing_angle():
    with pytest.raises(ValueError):
        refract_external_to_internal(math.pi / 2, 1.5)


# ---- Function: longitudinal_component()
def test_longitudinal_component_examples():
    assert longitudinal_component(7.0, 0.0) == 7.0
    assert longitudinal_component(7.0, 7.0) == 0.0
    assert longitudinal_component(5.0, 3.0) == pytest.approx(4.0)


def test_longitudinal_component_pythagoras():
    k = np.linspace(10.0, 30.0, 9)
    q = 0.37 * k
    kz = longitudinal_component(k, q)
    np.testing.assert_allclose(kz**2 + q**2, k**2, rtol=1e-12)


def test_longitudinal_component_evanescent():
    with pytest.raises(EvanescentModeError):
        longitudinal_component(1.0, 1.5)


def test_kato_bbo_is_a_sellmeier_model(bbo):
    assert isinstance(bbo, SellmeierModel)
    assert (bbo.lambda_min, bbo.lambda_max) == (0.22, 1.06)
