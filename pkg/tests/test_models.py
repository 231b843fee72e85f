import math

import numpy as np
import pytest

from spdcwindow.models import (
    GridSpec,
    ModeGrid,
    EmissionMode,
    FilterConfig,
    IsoFluxCurve,
    SourceConfig,
    QuadratureSpec,
    WindowArrangement,
)
from spdcwindow.physics.crystal_optics import kato_bbo


@pytest.fixture
def small_grid():
    return GridSpec(
        theta_min=0.0,
        theta_max=math.radians(6.0),
        lambda_min=600.0,
        lambda_max=800.0,
        n_theta=3,
        n_lambda=2,
    )


@pytest.fixture
def small_maps(small_grid):
    values_P = np.array([[0.1, 0.2], [1.0, 0.5], [0.3, 0.4]])
    values_phi = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, np.nan]])
    return ModeGrid(spec=small_grid, values_P=values_P, values_phi=values_phi)


def _arrangement(fwhm, width_deg, flux, phase_range):
    return WindowArrangement(
        iris_center=math.radians(3.0),
        iris_width=math.radians(width_deg),
        filter=FilterConfig(lambda_center=702.2, fwhm=fwhm),
        flux=flux,
        phase_range=phase_range,
    )


# ---- SourceConfig
def test_source_config_derived_values():
    cfg = SourceConfig(
        lambda_pump=351.1,
        crystal_length_d=590.0,
        cut_angle=math.radians(33.9),
        sellmeier=kato_bbo(),
        comp_cut_angle=0.5,
        comp_tilt=0.1,
    )
    assert cfg.lambda_degenerate == pytest.approx(702.2)
    assert cfg.comp_axis_angle == pytest.approx(0.6)
    assert cfg.phase_sign == 1.0
    assert not cfg.calibrated


@pytest.mark.parametrize(
    'overrides',
    [
        {'lambda_pump': 0.0},
        {'crystal_length_d': -1.0},
        {'cut_angle': 0.0},
        {'cut_angle': math.pi / 2},
        {'comp_thickness': -0.1},
        {'crystal_order': 'sideways'},
    ],
)
def test_source_config_rejects_invalid_values(overrides):
    values = {
        'lambda_pump': 351.1,
        'crystal_length_d': 590.0,
        'cut_angle': math.radians(33.9),
        'sellmeier': kato_bbo(),
    }
    values.update(overrides)
    with pytest.raises(ValueError):
        SourceConfig(**values)


# ---- EmissionMode / FilterConfig
def test_emission_mode_rejects_grazing_angle():
    with pytest.raises(ValueError):
        EmissionMode(theta_ext=math.pi / 2, phi=0.0, lambda_s=702.2)


def test_emission_mode_rejects_negative_wavelength():
    with pytest.raises(ValueError):
        EmissionMode(theta_ext=0.0, phi=0.0, lambda_s=-1.0)


def test_filter_rejects_zero_fwhm():
    with pytest.raises(ValueError):
        FilterConfig(lambda_center=702.2, fwhm=0.0)


# ---- GridSpec / QuadratureSpec
def test_grid_cell_centers(small_grid):
    np.testing.assert_allclose(
        np.degrees(small_grid.theta_centers()), [1.0, 3.0, 5.0]
    )
    np.testing.assert_allclose(small_grid.lambda_centers(), [650.0, 750.0])


def test_grid_needs_two_cells_per_axis():
    with pytest.raises(ValueError, match='at least 2 cells'):
        GridSpec(0.0, 0.1, 600.0, 800.0, n_theta=1, n_lambda=4)


def test_grid_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        GridSpec(0.1, 0.0, 600.0, 800.0, n_theta=4, n_lambda=4)


def test_quadrature_rejects_zero_step():
    with pytest.raises(ValueError):
        QuadratureSpec(0.0, 0.1, 600.0, 800.0, 10, 0.0, 11)


# ---- ModeGrid
def test_mode_grid_rejects_wrong_shape(small_grid):
    with pytest.raises(ValueError, match='shape'):
        ModeGrid(spec=small_grid, values_P=np.zeros((2, 3)), values_phi=np.zeros((3, 2)))


def test_mode_grid_peak_location(small_maps):
    theta, lam = small_maps.peak_location()
    assert math.degrees(theta) == pytest.approx(3.0)
    assert lam == pytest.approx(650.0)


def test_mode_grid_frame_is_lambda_major(small_maps):
    frame = small_maps.to_frame()
    assert list(frame.columns) == ['theta_deg', 'lambda_nm', 'P', 'phi_rad']
    assert len(frame) == 6
    np.testing.assert_allclose(frame['theta_deg'], [1.0, 3.0, 5.0] * 2)
    np.testing.assert_allclose(frame['lambda_nm'], [650.0] * 3 + [750.0] * 3)
    np.testing.assert_allclose(frame['P'], [0.1, 1.0, 0.3, 0.2, 0.5, 0.4])
    assert np.isnan(frame['phi_rad'].iloc[-1])


# ---- WindowArrangement
def test_window_theta_bounds():
    arr = _arrangement(30.0, 0.5, None, None)
    lo, hi = arr.theta_bounds
    assert math.degrees(lo) == pytest.approx(2.75)
    assert math.degrees(hi) == pytest.approx(3.25)


def test_window_rejects_crossing_the_axis():
    with pytest.raises(ValueError, match='below the pump axis'):
        WindowArrangement(
            iris_center=0.01,
            iris_width=0.05,
            filter=FilterConfig(lambda_center=702.2, fwhm=30.0),
        )


@pytest.mark.parametrize(
    'flux, phase_range', [(-1.0, None), (None, -0.1)]
)
def test_window_rejects_negative_results(flux, phase_range):
    with pytest.raises(ValueError):
        _arrangement(30.0, 0.5, flux, phase_range)


# ---- IsoFluxCurve
def test_iso_flux_curve_frame():
    points = [
        _arrangement(20.0, 0.6, 1.0, 0.3),
        _arrangement(30.0, 0.5, 1.0, 0.2),
    ]
    curve = IsoFluxCurve(target_flux=1.0, points=points, optimum_index=1)
    assert curve.optimum is points[1]
    assert curve.infeasible_fwhm == []

    frame = curve.to_frame()
    assert list(frame.columns) == [
        'fwhm_nm',
        'iris_width_deg',
        'iris_center_deg',
        'flux',
        'phase_range_rad',
        'is_optimum',
    ]
    assert frame['is_optimum'].tolist() == [False, True]
    np.testing.assert_allclose(frame['iris_width_deg'], [0.6, 0.5])
