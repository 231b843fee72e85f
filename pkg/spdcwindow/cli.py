"""Command line of spdcwindow.

Subcommands:
    phasematch  indices, degenerate opening angle, collinear mismatch
    maps        calibrated probability and residual-phase maps
    optimize    iso-flux curve and the arrangement of least phase variation

Exit codes are 0 (success), 1 (unexpected failure), 2 (parse), 3 (validation
or configuration), 4 (output) and 5 (infeasible optimization).
"""

import sys
import json
import logging
import argparse
import logging.config
from pathlib import Path
from dataclasses import replace

import yaml

from spdcwindow.client import ClientSource
from spdcwindow.exporter import (
    write_json,
    write_maps_csv,
    ensure_output_dir,
    write_isoflux_csv,
)
from spdcwindow.exceptions import (
    OutputError,
    SpdcWindowError,
    EmptyCurveError,
    ConfigParseError,
    ConfigurationError,
    InfeasibleFluxError,
    EvanescentModeError,
    DispersionRangeError,
    ConfigValidationError,
)
from spdcwindow.config.settings import (
    EXIT_CODES,
    OUTPUT_FILES,
    PACKAGE_NAME,
    PACKAGE_VERSION,
)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

__all__ = [
    'build_parser',
    'setup_logging',
    'cmd_phasematch',
    'cmd_maps',
    'cmd_optimize',
    'main',
]

LOGGING_CONFIG = Path(__file__).parent / 'config' / 'logging.yaml'
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


def setup_logging(level: str | None = None) -> None:
    """Configure logging from the packaged YAML document.

    Args:
        level (str | None, optional): Level of the ``spdcwindow`` logger,
            overriding the document.
    """
    with open(LOGGING_CONFIG, encoding='utf-8') as f:
        config = yaml.safe_load(f)
    if level is not None:
        config['loggers'][PACKAGE_NAME]['level'] = level
    logging.config.dictConfig(config)


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with its three subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--config',
        type=Path,
        default=None,
        help='JSON run configuration (defaults reproduce the reference setup)',
    )
    common.add_argument(
        '--set',
        dest='overrides',
        action='append',
        default=[],
        metavar='SECTION.KEY=VALUE',
        help='override one configuration value; VALUE is read as JSON',
    )
    common.add_argument(
        '--output-dir',
        type=Path,
        default=None,
        help='directory for the artifacts (overrides output.directory)',
    )
    common.add_argument(
        '--log-level',
        choices=LOG_LEVELS,
        default=None,
        help='level of the spdcwindow logger',
    )
    common.add_argument(
        '--quiet',
        action='store_true',
        help='disable progress bars',
    )

    parser = argparse.ArgumentParser(
        prog=PACKAGE_NAME,
        description='Two-crystal SPDC emission maps and iso-flux window optimization.',
    )
    parser.add_argument(
        '--version', action='version', version=f'%(prog)s {PACKAGE_VERSION}'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    subparsers.add_parser(
        'phasematch',
        parents=[common],
        help='principal indices and degenerate opening angle',
    )
    subparsers.add_parser(
        'maps',
        parents=[common],
        help='calibrated probability and residual-phase maps',
    )
    subparsers.add_parser(
        'optimize',
        parents=[common],
        help='iso-flux curve and optimal window arrangement',
    )
    return parser


# --------------------------------------------------------
# ----                  Subcommands                   ----
# --------------------------------------------------------
def cmd_phasematch(client: ClientSource) -> dict:
    """Print the phase-matching report and write ``phasematch.json``."""
    report = client.phasematch()
    print(json.dumps(report, sort_keys=True, indent=2))
    output = client.run_config.output
    if output.write_json:
        directory = ensure_output_dir(output.directory)
        write_json(report, directory / OUTPUT_FILES['phasematch'])
    return report


def cmd_maps(client: ClientSource) -> dict:
    """Write ``maps.csv`` and ``maps_meta.json``."""
    maps, meta = client.maps()
    output = client.run_config.output
    if output.write_csv or output.write_json:
        directory = ensure_output_dir(output.directory)
        if output.write_csv:
            write_maps_csv(maps, directory / OUTPUT_FILES['maps'])
        if output.write_json:
            write_json(meta, directory / OUTPUT_FILES['maps_meta'])
    return meta


def cmd_optimize(client: ClientSource) -> dict:
    """Write ``isoflux.csv`` and ``optimum.json`` and print the optimum."""
    curve, _, summary = client.optimize()
    best = summary['optimum']
    print(
        f'optimum: fwhm {best["fwhm_nm"]:g} nm, iris {best["iris_width_deg"]:.4f} deg, '
        f'phase range {best["phase_range_rad"]:.6g} rad'
    )
    output = client.run_config.output
    if output.write_csv or output.write_json:
        directory = ensure_output_dir(output.directory)
        if output.write_csv:
            write_isoflux_csv(curve, directory / OUTPUT_FILES['isoflux'])
        if output.write_json:
            write_json(summary, directory / OUTPUT_FILES['optimum'])
    return summary


COMMANDS = {
    'phasematch': cmd_phasematch,
    'maps': cmd_maps,
    'optimize': cmd_optimize,
}


def _run(args: argparse.Namespace) -> None:
    client = ClientSource.from_file(
        args.config, args.overrides, progress=not args.quiet
    )
    if args.output_dir is not None:
        run_config = client.run_config
        client = ClientSource(
            replace(
                run_config,
                output=replace(run_config.output, directory=str(args.output_dir)),
            ),
            progress=not args.quiet,
        )
    COMMANDS[args.command](client)


def main(argv: list[str] | None = None) -> int:
    """Run the command line.

    Args:
        argv (list[str] | None, optional): Arguments without the program
            name. Defaults to ``sys.argv[1:]``.

    Returns:
        int: Process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help and --version exit 0, usage errors exit 2
        return EXIT_CODES['success'] if e.code == 0 else EXIT_CODES['parse']
    setup_logging(args.log_level)

    try:
        _run(args)
    except ConfigParseError as e:
        logger.error(f'Configuration parse error: {e}')
        return EXIT_CODES['parse']
    except (
        ConfigValidationError,
        ConfigurationError,
        DispersionRangeError,
        EvanescentModeError,
    ) as e:
        logger.error(f'Invalid configuration: {e}')
        return EXIT_CODES['validation']
    except OutputError as e:
        logger.error(f'Output error: {e}')
        return EXIT_CODES['io']
    except (EmptyCurveError, InfeasibleFluxError) as e:
        logger.error(f'Optimization infeasible: {e}')
        return EXIT_CODES['infeasible']
    except ValueError as e:
        logger.exception(f'Invalid input: {e}')
        return EXIT_CODES['validation']
    except SpdcWindowError as e:
        logger.exception(f'Unhandled spdcwindow error: {e}')
        return EXIT_CODES['internal']
    except Exception as e:
        logger.exception(f'Unexpected failure: {e}')
        return EXIT_CODES['internal']
    return EXIT_CODES['success']


if __name__ == '__main__':
    sys.exit(main())
