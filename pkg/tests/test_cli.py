import json
import math

import pandas as pd
import pytest

import spdcwindow.cli as cli_module
from spdcwindow.cli import main, build_parser
from spdcwindow.loader import RunConfig
from spdcwindow.exceptions import SpdcWindowError
from spdcwindow.physics.spdc_model import collinear_cut_angle


# -----------------------------------
# ----      PyTest Fixtures      ----
# -----------------------------------
@pytest.fixture(autouse=True)
def no_logging_setup(monkeypatch):
    # keep the handlers pytest installs for caplog
    monkeypatch.setattr(cli_module, 'setup_logging', lambda level=None: None)


@pytest.fixture
def run(resources_dir, tmp_path):
    def invoke(command, *extra, output_dir=None):
        argv = [
            command,
            '--config',
            str(resources_dir / 'reduced_config.json'),
            '--output-dir',
            str(output_dir or tmp_path / 'out'),
            '--quiet',
            *extra,
        ]
        return main(argv)

    return invoke


# -----------------------------------
# ----         Unit Tests        ----
# -----------------------------------


# ---- Parser
def test_parser_collects_overrides():
    args = build_parser().parse_args(
        ['maps', '--set', 'grid.n_theta=8', '--set', 'grid.n_lambda=8']
    )
    assert args.command == 'maps'
    assert args.overrides == ['grid.n_theta=8', 'grid.n_lambda=8']
    assert args.config is None
    assert not args.quiet


def test_unknown_subcommand_is_a_parse_error():
    assert main(['calibrate']) == 2


def test_missing_subcommand_is_a_parse_error():
    assert main([]) == 2


def test_version_exits_cleanly(capsys):
    assert main(['--version']) == 0
    assert 'spdcwindow' in capsys.readouterr().out


# ---- phasematch
def test_phasematch_writes_the_report(run, tmp_path, capsys):
    assert run('phasematch') == 0
    printed = json.loads(capsys.readouterr().out)
    written = json.loads((tmp_path / 'out' / 'phasematch.json').read_text())
    assert printed == written
    assert 2.5 < written['opening_angle_external_deg'] < 3.3


def test_phasematch_at_the_collinear_cut_angle(run, tmp_path):
    cut_deg = math.degrees(collinear_cut_angle(RunConfig().source_config()))
    assert run('phasematch', '--set', f'source.cut_angle_deg={cut_deg!r}') == 0
    written = json.loads((tmp_path / 'out' / 'phasematch.json').read_text())
    assert written['opening_angle_external_deg'] == 0.0


def test_json_output_can_be_disabled(run, tmp_path):
    assert run('phasematch', '--set', 'output.write_json=false') == 0
    assert not (tmp_path / 'out' / 'phasematch.json').exists()


# ---- maps
def test_maps_writes_csv_and_metadata(run, tmp_path):
    assert run('maps') == 0
    frame = pd.read_csv(tmp_path / 'out' / 'maps.csv')
    assert list(frame.columns) == ['theta_deg', 'lambda_nm', 'P', 'phi_rad']
    assert len(frame) == 48 * 48
    assert frame['P'].max() == 1.0
    meta = json.loads((tmp_path / 'out' / 'maps_meta.json').read_text())
    assert meta['calibrated'] is True
    assert meta['grid']['n_lambda'] == 48


def test_maps_are_byte_identical_across_runs(run, tmp_path):
    assert run('maps', output_dir=tmp_path / 'first') == 0
    assert run('maps', output_dir=tmp_path / 'second') == 0
    for name in ('maps.csv', 'maps_meta.json'):
        first = (tmp_path / 'first' / name).read_bytes()
        second = (tmp_path / 'second' / name).read_bytes()
        assert first == second


# ---- optimize
def test_optimize_writes_curve_and_optimum(run, tmp_path, capsys):
    assert run('optimize') == 0
    assert capsys.readouterr().out.startswith('optimum: fwhm ')
    frame = pd.read_csv(tmp_path / 'out' / 'isoflux.csv')
    assert frame['fwhm_nm'].tolist() == [20.0, 30.0, 40.0]
    assert frame['is_optimum'].sum() == 1
    optimum = json.loads((tmp_path / 'out' / 'optimum.json').read_text())
    best = frame.loc[frame['is_optimum']].iloc[0]
    assert optimum['optimum']['fwhm_nm'] == best['fwhm_nm']
    assert optimum['n_feasible'] == 3


def test_optimize_with_no_feasible_point(run):
    code = run(
        'optimize',
        '--set',
        'optimize.reference_width_deg=5',
        '--set',
        'optimize.reference_fwhm_nm=100',
        '--set',
        'optimize.fwhm_values_nm=[1]',
    )
    assert code == 5


# ---- exit codes
@pytest.mark.parametrize(
    'override',
    [
        'source.lambda_pump_nm=-1',
        'source.lambda_pump_nm=600',
        'grid.n_theta=1',
        'source.cut_angle_deg=20',
        'grid.lambda_max_nm=360',
    ],
)
def test_invalid_configuration_exit_code(run, override):
    assert run('maps', '--set', override) == 3


def test_malformed_configuration_exit_code(resources_dir, tmp_path):
    argv = [
        'phasematch',
        '--config',
        str(resources_dir / 'malformed_config.json'),
        '--output-dir',
        str(tmp_path),
    ]
    assert main(argv) == 2


def test_malformed_override_exit_code(run):
    assert run('phasematch', '--set', 'n_theta') == 2


def test_output_directory_blocked_by_a_file(run, tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('x', encoding='utf-8')
    assert run('phasematch', output_dir=blocker) == 4


def test_unexpected_failure_exit_code(run, monkeypatch, caplog):
    def broken(self):
        raise RuntimeError('lost the crystal')

    monkeypatch.setattr(cli_module.ClientSource, 'phasematch', broken)
    assert run('phasematch') == 1
    assert 'lost the crystal' in caplog.text
    assert 'Traceback' in caplog.text


def test_unmapped_library_error_exit_code(run, monkeypatch, caplog):
    def broken(self):
        raise SpdcWindowError('unclassified failure')

    monkeypatch.setattr(cli_module.ClientSource, 'phasematch', broken)
    assert run('phasematch') == 1
    assert 'unclassified failure' in caplog.text
