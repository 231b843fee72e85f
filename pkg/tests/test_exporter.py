import json
import math

import numpy as np
import pytest

from spdcwindow.models import (
    GridSpec,
    ModeGrid,
    FilterConfig,
    IsoFluxCurve,
    WindowArrangement,
)
from spdcwindow.exceptions import OutputError
from spdcwindow.exporter import (
    write_json,
    write_maps_csv,
    ensure_output_dir,
    write_isoflux_csv,
)


@pytest.fixture
def maps():
    spec = GridSpec(0.0, math.radians(4.0), 600.0, 800.0, n_theta=2, n_lambda=2)
    return ModeGrid(
        spec=spec,
        values_P=np.array([[1.0, 0.25], [0.5, 0.0]]),
        values_phi=np.array([[0.1, np.nan], [-0.2, np.nan]]),
    )


@pytest.fixture
def curve():
    points = [
        WindowArrangement(
            iris_center=math.radians(3.0),
            iris_width=math.radians(width),
            filter=FilterConfig(lambda_center=702.2, fwhm=fwhm),
            flux=2.0,
            phase_range=spread,
        )
        for fwhm, width, spread in [(20.0, 0.6, 0.3), (30.0, 0.5, 0.1)]
    ]
    return IsoFluxCurve(target_flux=2.0, points=points, optimum_index=1)


def test_write_maps_csv(tmp_path, maps):
    path = write_maps_csv(maps, tmp_path / 'maps.csv')
    lines = path.read_text(encoding='utf-8').split('\n')
    assert lines[0] == 'theta_deg,lambda_nm,P,phi_rad'
    assert lines[-1] == ''
    rows = lines[1:-1]
    assert len(rows) == 4
    assert rows[0].endswith(',650.0,1.0,0.1')
    # absent phases are empty cells
    assert rows[2].endswith(',')
    assert rows[3].endswith(',750.0,0.0,')


def test_write_isoflux_csv(tmp_path, curve):
    path = write_isoflux_csv(curve, tmp_path / 'isoflux.csv')
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == (
        'fwhm_nm,iris_width_deg,iris_center_deg,flux,phase_range_rad,is_optimum'
    )
    assert len(lines) == 3
    assert lines[1].startswith('20.0,')
    assert lines[1].endswith(',False')
    assert lines[2].endswith(',True')


def test_write_json_is_sorted_and_terminated(tmp_path):
    path = write_json({'b': 1, 'a': {'d': None, 'c': 2.5}}, tmp_path / 'out.json')
    text = path.read_text(encoding='utf-8')
    assert text.endswith('}\n')
    assert text.index('"a"') < text.index('"b"')
    assert text.index('"c"') < text.index('"d"')
    assert json.loads(text) == {'a': {'c': 2.5, 'd': None}, 'b': 1}


def test_repeated_writes_are_identical(tmp_path, maps):
    first = write_maps_csv(maps, tmp_path / 'first.csv').read_bytes()
    second = write_maps_csv(maps, tmp_path / 'second.csv').read_bytes()
    assert first == second


def test_ensure_output_dir_creates_parents(tmp_path):
    path = ensure_output_dir(tmp_path / 'a' / 'b')
    assert path.is_dir()


def test_ensure_output_dir_over_a_file(tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('x', encoding='utf-8')
    with pytest.raises(OutputError):
        ensure_output_dir(blocker)


def test_write_into_missing_directory(tmp_path, maps):
    with pytest.raises(OutputError):
        write_json({'a': 1}, tmp_path / 'missing' / 'out.json')
    with pytest.raises(OutputError):
        write_maps_csv(maps, tmp_path / 'missing' / 'maps.csv')
