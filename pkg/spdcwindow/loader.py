"""Run configuration: sections, loading, validation and serialization.

The run configuration is one JSON document whose sections mirror the
dataclasses below. Values are stored in the external units of the document
(degrees, nm, mm) so that ``load -> dump -> load`` is the identity; the
conversion to the internal radians/um happens once, in the ``*_spec`` and
``*_config`` builders of :class:`RunConfig`.

Example:
    >>> from spdcwindow.loader import load_config
    >>> cfg = load_config(None, overrides=['source.cut_angle_deg=33.9'])
    >>> cfg.source.cut_angle_deg
    33.9
"""

import json
import math
import types
import typing
import logging
from typing import Any
from pathlib import Path
from dataclasses import (
    field,
    fields,
    asdict,
    dataclass,
)

from spdcwindow.models import (
    GridSpec,
    FilterConfig,
    SourceConfig,
    QuadratureSpec,
    SellmeierModel,
    WindowArrangement,
)
from spdcwindow.exceptions import ConfigParseError, ConfigValidationError
from spdcwindow.config.settings import (
    DEFAULT_N_THETA,
    DEFAULT_PHI_0_RAD,
    DEFAULT_N_LAMBDA,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_FLUX_RTOL,
    DEFAULT_FWHM_MIN_NM,
    DEFAULT_FWHM_MAX_NM,
    DEFAULT_MAX_WORKERS,
    DEFAULT_FWHM_STEP_NM,
    DEFAULT_PHASE_METRIC,
    DEFAULT_CRYSTAL_ORDER,
    DEFAULT_CUT_ANGLE_DEG,
    DEFAULT_COMP_TILT_DEG,
    DEFAULT_LAMBDA_MIN_NM,
    DEFAULT_LAMBDA_MAX_NM,
    DEFAULT_REGION_POINTS,
    DEFAULT_THETA_MIN_DEG,
    DEFAULT_THETA_MAX_DEG,
    DEFAULT_FLUX_N_LAMBDA,
    KATO_BBO_COEFFICIENTS,
    DEFAULT_FILTER_FWHM_NM,
    DEFAULT_LAMBDA_PUMP_NM,
    DEFAULT_MAX_ITERATIONS,
    SUPPORTED_PHASE_METRICS,
    DEFAULT_CRYSTAL_LENGTH_MM,
    DEFAULT_COMP_THICKNESS_MM,
    DEFAULT_REFERENCE_FWHM_NM,
    SUPPORTED_CRYSTAL_ORDERS,
    DEFAULT_COMP_CUT_ANGLE_DEG,
    DEFAULT_REFERENCE_WIDTH_DEG,
    DEFAULT_FLUX_MAX_THETA_STEP_DEG,
)
from spdcwindow.utils.numeric_utils import NM_PER_UM

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

__all__ = [
    'SourceSection',
    'CompensationSection',
    'DispersionSection',
    'FilterSection',
    'GridSection',
    'OptimizeSection',
    'OutputSection',
    'RunConfig',
    'load_config',
    'parse_config',
    'apply_overrides',
    'config_to_dict',
    'dump_config',
]

UM_PER_MM = 1e3


def _require(condition: bool, key_path: str, constraint: str) -> None:
    if not condition:
        raise ConfigValidationError(key_path, constraint)


# ---------------------------------------------------------------- #
# ---------              Configuration sections          --------- #
# ---------------------------------------------------------------- #
@dataclass(frozen=True)
class SourceSection:
    """Pump and down-conversion crystals."""

    lambda_pump_nm: float = DEFAULT_LAMBDA_PUMP_NM
    crystal_length_mm: float = DEFAULT_CRYSTAL_LENGTH_MM
    cut_angle_deg: float = DEFAULT_CUT_ANGLE_DEG
    crystal_order: str = DEFAULT_CRYSTAL_ORDER
    phi_0_rad: float = DEFAULT_PHI_0_RAD

    def validate(self) -> None:
        _require(self.lambda_pump_nm > 0, 'source.lambda_pump_nm', 'must be > 0')
        _require(
            self.crystal_length_mm > 0, 'source.crystal_length_mm', 'must be > 0'
        )
        _require(
            0 < self.cut_angle_deg < 90,
            'source.cut_angle_deg',
            'must lie in (0, 90)',
        )
        _require(
            self.crystal_order in SUPPORTED_CRYSTAL_ORDERS,
            'source.crystal_order',
            f'must be one of {SUPPORTED_CRYSTAL_ORDERS}',
        )


@dataclass(frozen=True)
class CompensationSection:
    """Compensation elements, one per arm."""

    comp_thickness_mm: float = DEFAULT_COMP_THICKNESS_MM
    comp_cut_angle_deg: float = DEFAULT_COMP_CUT_ANGLE_DEG
    comp_tilt_deg: float = DEFAULT_COMP_TILT_DEG
    calibrate: bool = True

    def validate(self) -> None:
        _require(
            self.comp_thickness_mm >= 0,
            'compensation.comp_thickness_mm',
            'must be >= 0',
        )
        _require(
            0 <= self.comp_cut_angle_deg <= 90,
            'compensation.comp_cut_angle_deg',
            'must lie in [0, 90]',
        )
        _require(
            -90 < self.comp_tilt_deg < 90,
            'compensation.comp_tilt_deg',
            'must lie in (-90, 90)',
        )


@dataclass(frozen=True)
class DispersionSection:
    """Sellmeier coefficients, wavelengths in um."""

    a_o: float = KATO_BBO_COEFFICIENTS['a_o']
    b_o: float = KATO_BBO_COEFFICIENTS['b_o']
    c_o: float = KATO_BBO_COEFFICIENTS['c_o']
    d_o: float = KATO_BBO_COEFFICIENTS['d_o']
    a_e: float = KATO_BBO_COEFFICIENTS['a_e']
    b_e: float = KATO_BBO_COEFFICIENTS['b_e']
    c_e: float = KATO_BBO_COEFFICIENTS['c_e']
    d_e: float = KATO_BBO_COEFFICIENTS['d_e']
    lambda_min_um: float = KATO_BBO_COEFFICIENTS['lambda_min_um']
    lambda_max_um: float = KATO_BBO_COEFFICIENTS['lambda_max_um']

    def validate(self) -> None:
        _require(self.lambda_min_um > 0, 'dispersion.lambda_min_um', 'must be > 0')
        _require(
            self.lambda_max_um > self.lambda_min_um,
            'dispersion.lambda_max_um',
            'must exceed dispersion.lambda_min_um',
        )
        try:
            self.sellmeier_model()
        except ValueError as e:
            raise ConfigValidationError('dispersion', str(e)) from e

    def sellmeier_model(self) -> SellmeierModel:
        return SellmeierModel(
            a_o=self.a_o,
            b_o=self.b_o,
            c_o=self.c_o,
            d_o=self.d_o,
            a_e=self.a_e,
            b_e=self.b_e,
            c_e=self.c_e,
            d_e=self.d_e,
            lambda_min=self.lambda_min_um,
            lambda_max=self.lambda_max_um,
        )


@dataclass(frozen=True)
class FilterSection:
    """Display filter of the maps; the center defaults to the degenerate wavelength."""

    lambda_center_nm: float | None = None
    fwhm_nm: float = DEFAULT_FILTER_FWHM_NM

    def validate(self) -> None:
        if self.lambda_center_nm is not None:
            _require(
                self.lambda_center_nm > 0,
                'filter.lambda_center_nm',
                'must be > 0',
            )
        _require(self.fwhm_nm > 0, 'filter.fwhm_nm', 'must be > 0')


@dataclass(frozen=True)
class GridSection:
    """Map grid plus flux quadrature and phase-range sampling."""

    theta_min_deg: float = DEFAULT_THETA_MIN_DEG
    theta_max_deg: float = DEFAULT_THETA_MAX_DEG
    lambda_min_nm: float = DEFAULT_LAMBDA_MIN_NM
    lambda_max_nm: float = DEFAULT_LAMBDA_MAX_NM
    n_theta: int = DEFAULT_N_THETA
    n_lambda: int = DEFAULT_N_LAMBDA
    flux_n_lambda: int = DEFAULT_FLUX_N_LAMBDA
    flux_max_theta_step_deg: float = DEFAULT_FLUX_MAX_THETA_STEP_DEG
    region_points: int = DEFAULT_REGION_POINTS

    def validate(self) -> None:
        _require(self.theta_min_deg >= 0, 'grid.theta_min_deg', 'must be >= 0')
        _require(
            self.theta_min_deg < self.theta_max_deg < 90,
            'grid.theta_max_deg',
            'must exceed grid.theta_min_deg and be < 90',
        )
        _require(self.lambda_min_nm > 0, 'grid.lambda_min_nm', 'must be > 0')
        _require(
            self.lambda_max_nm > self.lambda_min_nm,
            'grid.lambda_max_nm',
            'must exceed grid.lambda_min_nm',
        )
        _require(self.n_theta >= 2, 'grid.n_theta', 'must be >= 2')
        _require(self.n_lambda >= 2, 'grid.n_lambda', 'must be >= 2')
        _require(self.flux_n_lambda >= 1, 'grid.flux_n_lambda', 'must be >= 1')
        _require(
            self.flux_max_theta_step_deg > 0,
            'grid.flux_max_theta_step_deg',
            'must be > 0',
        )
        _require(self.region_points >= 2, 'grid.region_points', 'must be >= 2')


@dataclass(frozen=True)
class OptimizeSection:
    """Reference arrangement, scanned FWHM values and solver tolerances."""

    reference_fwhm_nm: float = DEFAULT_REFERENCE_FWHM_NM
    reference_width_deg: float = DEFAULT_REFERENCE_WIDTH_DEG
    fwhm_min_nm: float = DEFAULT_FWHM_MIN_NM
    fwhm_max_nm: float = DEFAULT_FWHM_MAX_NM
    fwhm_step_nm: float = DEFAULT_FWHM_STEP_NM
    fwhm_values_nm: list[float] | None = None
    flux_rtol: float = DEFAULT_FLUX_RTOL
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    max_workers: int = DEFAULT_MAX_WORKERS
    phase_metric: str = DEFAULT_PHASE_METRIC

    def validate(self) -> None:
        _require(
            self.reference_fwhm_nm > 0, 'optimize.reference_fwhm_nm', 'must be > 0'
        )
        _require(
            self.reference_width_deg > 0,
            'optimize.reference_width_deg',
            'must be > 0',
        )
        _require(self.fwhm_min_nm > 0, 'optimize.fwhm_min_nm', 'must be > 0')
        _require(
            self.fwhm_max_nm >= self.fwhm_min_nm,
            'optimize.fwhm_max_nm',
            'must be >= optimize.fwhm_min_nm',
        )
        _require(self.fwhm_step_nm > 0, 'optimize.fwhm_step_nm', 'must be > 0')
        if self.fwhm_values_nm is not None:
            values = self.fwhm_values_nm
            _require(len(values) > 0, 'optimize.fwhm_values_nm', 'must not be empty')
            _require(
                all(v > 0 for v in values),
                'optimize.fwhm_values_nm',
                'every value must be > 0',
            )
            _require(
                all(b > a for a, b in zip(values, values[1:])),
                'optimize.fwhm_values_nm',
                'must be strictly increasing',
            )
        _require(
            0 < self.flux_rtol < 1, 'optimize.flux_rtol', 'must lie in (0, 1)'
        )
        _require(
            self.max_iterations >= 1, 'optimize.max_iterations', 'must be >= 1'
        )
        _require(self.max_workers >= 1, 'optimize.max_workers', 'must be >= 1')
        _require(
            self.phase_metric in SUPPORTED_PHASE_METRICS,
            'optimize.phase_metric',
            f'must be one of {SUPPORTED_PHASE_METRICS}',
        )

    def fwhm_values(self) -> list[float]:
        """Scanned FWHM values in nm, the explicit list if one is configured."""
        if self.fwhm_values_nm is not None:
            return list(self.fwhm_values_nm)
        span = (self.fwhm_max_nm - self.fwhm_min_nm) / self.fwhm_step_nm
        count = math.floor(span + 1e-9) + 1
        return [self.fwhm_min_nm + i * self.fwhm_step_nm for i in range(count)]


@dataclass(frozen=True)
class OutputSection:
    """Where and in which formats artifacts are written."""

    directory: str = DEFAULT_OUTPUT_DIR
    write_csv: bool = True
    write_json: bool = True

    def validate(self) -> None:
        _require(len(self.directory) > 0, 'output.directory', 'must not be empty')


_SECTIONS = {
    'source': SourceSection,
    'compensation': CompensationSection,
    'dispersion': DispersionSection,
    'filter': FilterSection,
    'grid': GridSection,
    'optimize': OptimizeSection,
    'output': OutputSection,
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration, one attribute per document section."""

    source: SourceSection = field(default_factory=SourceSection)
    compensation: CompensationSection = field(
        default_factory=CompensationSection
    )
    dispersion: DispersionSection = field(default_factory=DispersionSection)
    filter: FilterSection = field(default_factory=FilterSection)
    grid: GridSection = field(default_factory=GridSection)
    optimize: OptimizeSection = field(default_factory=OptimizeSection)
    output: OutputSection = field(default_factory=OutputSection)

    def validate(self) -> None:
        """Check every section, then the constraints spanning sections.

        Raises:
            ConfigValidationError: On the first violated constraint.
        """
        for name in _SECTIONS:
            getattr(self, name).validate()

        lam_d_um = 2.0 * self.source.lambda_pump_nm / NM_PER_UM
        lam_p_um = self.source.lambda_pump_nm / NM_PER_UM
        lo, hi = self.dispersion.lambda_min_um, self.dispersion.lambda_max_um
        _require(
            lo <= lam_p_um and lam_d_um <= hi,
            'source.lambda_pump_nm',
            f'pump {lam_p_um:g} um and degenerate {lam_d_um:g} um wavelengths '
            f'must lie in the dispersion validity range [{lo:g}, {hi:g}] um',
        )

    # ---- conversions to the internal units
    def source_config(self) -> SourceConfig:
        """Uncalibrated :class:`SourceConfig` in internal units."""
        return SourceConfig(
            lambda_pump=self.source.lambda_pump_nm,
            crystal_length_d=self.source.crystal_length_mm * UM_PER_MM,
            cut_angle=math.radians(self.source.cut_angle_deg),
            sellmeier=self.dispersion.sellmeier_model(),
            comp_thickness=self.compensation.comp_thickness_mm * UM_PER_MM,
            comp_cut_angle=math.radians(self.compensation.comp_cut_angle_deg),
            comp_tilt=math.radians(self.compensation.comp_tilt_deg),
            phi_0=self.source.phi_0_rad,
            crystal_order=self.source.crystal_order,
        )

    def lambda_center(self) -> float:
        if self.filter.lambda_center_nm is None:
            return 2.0 * self.source.lambda_pump_nm
        return self.filter.lambda_center_nm

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            lambda_center=self.lambda_center(), fwhm=self.filter.fwhm_nm
        )

    def grid_spec(self) -> GridSpec:
        return GridSpec(
            theta_min=math.radians(self.grid.theta_min_deg),
            theta_max=math.radians(self.grid.theta_max_deg),
            lambda_min=self.grid.lambda_min_nm,
            lambda_max=self.grid.lambda_max_nm,
            n_theta=self.grid.n_theta,
            n_lambda=self.grid.n_lambda,
        )

    def quadrature_spec(self) -> QuadratureSpec:
        """Flux quadrature over the map's angular range and band."""
        return QuadratureSpec(
            theta_min=math.radians(self.grid.theta_min_deg),
            theta_max=math.radians(self.grid.theta_max_deg),
            lambda_min=self.grid.lambda_min_nm,
            lambda_max=self.grid.lambda_max_nm,
            n_lambda=self.grid.flux_n_lambda,
            max_theta_step=math.radians(self.grid.flux_max_theta_step_deg),
            region_points=self.grid.region_points,
        )

    def reference_arrangement(self, iris_center: float) -> WindowArrangement:
        """Arrangement fixing the target flux, centered on ``iris_center`` (rad)."""
        return WindowArrangement(
            iris_center=iris_center,
            iris_width=math.radians(self.optimize.reference_width_deg),
            filter=FilterConfig(
                lambda_center=self.lambda_center(),
                fwhm=self.optimize.reference_fwhm_nm,
            ),
        )


# ---------------------------------------------------------------- #
# ---------            Parsing and validation            --------- #
# ---------------------------------------------------------------- #
def _coerce(value: Any, annotation: Any, key_path: str) -> Any:
    """Check ``value`` against a field annotation; ints are accepted as floats."""
    if isinstance(annotation, types.UnionType):
        options = typing.get_args(annotation)
    else:
        options = (annotation,)
    if value is None:
        _require(type(None) in options, key_path, 'must not be null')
        return None
    target = next(opt for opt in options if opt is not type(None))

    if typing.get_origin(target) is list:
        _require(isinstance(value, list), key_path, 'must be a list')
        (item_type,) = typing.get_args(target)
        return [
            _coerce(item, item_type, f'{key_path}[{idx}]')
            for idx, item in enumerate(value)
        ]
    if target is bool:
        _require(isinstance(value, bool), key_path, 'must be a boolean')
        return value
    if target is int:
        _require(
            isinstance(value, int) and not isinstance(value, bool),
            key_path,
            'must be an integer',
        )
        return value
    if target is float:
        _require(
            isinstance(value, int | float) and not isinstance(value, bool),
            key_path,
            'must be a number',
        )
        _require(math.isfinite(value), key_path, 'must be finite')
        return float(value)
    if target is str:
        _require(isinstance(value, str), key_path, 'must be a string')
        return value
    raise TypeError(f'Unsupported configuration field type {target!r}')


def _build_section(name: str, data: Any) -> Any:
    section_cls = _SECTIONS[name]
    _require(isinstance(data, dict), name, 'must be a JSON object')
    known = {f.name: f for f in fields(section_cls)}
    for key in data:
        _require(key in known, f'{name}.{key}', 'unknown key')
    kwargs = {
        key: _coerce(value, known[key].type, f'{name}.{key}')
        for key, value in data.items()
    }
    return section_cls(**kwargs)


def parse_config(data: dict[str, Any]) -> RunConfig:
    """Build and validate a :class:`RunConfig` from a decoded document.

    Args:
        data (dict[str, Any]): Decoded JSON object; missing sections and keys
            take their defaults.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigValidationError: On an unknown key, a wrong type or a violated
            constraint, naming the key path.
    """
    for name in data:
        _require(name in _SECTIONS, name, 'unknown section')
    sections = {name: _build_section(name, data[name]) for name in data}
    cfg = RunConfig(**sections)
    cfg.validate()
    return cfg


def _parse_override(override: str) -> tuple[str, str, Any]:
    key_path, sep, raw = override.partition('=')
    section, dot, key = key_path.strip().partition('.')
    if not sep or not dot or not section or not key:
        raise ConfigParseError(
            f'Malformed override {override!r}; expected section.key=value'
        )
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return section, key, value


def apply_overrides(
    data: dict[str, Any], overrides: list[str] | None
) -> dict[str, Any]:
    """Return a copy of ``data`` with ``section.key=value`` overrides applied.

    The value is decoded as JSON and falls back to the raw string.

    Raises:
        ConfigParseError: If an override is not of the form ``section.key=value``.
    """
    merged = {
        name: dict(section) if isinstance(section, dict) else section
        for name, section in data.items()
    }
    for override in overrides or []:
        section, key, value = _parse_override(override)
        target = merged.setdefault(section, {})
        _require(isinstance(target, dict), section, 'must be a JSON object')
        target[key] = value
        logger.debug(f'Config override {section}.{key} = {value!r}')
    return merged


def _read_document(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        logger.error(f'Cannot read configuration {path}: {e}')
        raise ConfigParseError(f'Cannot read configuration {path}: {e}') from e
    if not text.strip():
        return {}
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        logger.error(f'Malformed configuration {path}: {e}')
        raise ConfigParseError(
            f'Malformed configuration {path}: {e.msg} '
            f'(line {e.lineno}, column {e.colno})'
        ) from e
    if not isinstance(document, dict):
        raise ConfigParseError(
            f'Configuration {path} must contain a JSON object at the top level'
        )
    return document


def load_config(
    path: str | Path | None, overrides: list[str] | None = None
) -> RunConfig:
    """Load, override and validate a run configuration.

    Args:
        path (str | Path | None): JSON document; ``None`` or an empty file
            gives the default setup.
        overrides (list[str] | None, optional): ``section.key=value`` items
            applied before validation.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigParseError: If the file cannot be read or decoded.
        ConfigValidationError: If a value violates a constraint.
    """
    document = {} if path is None else _read_document(path)
    cfg = parse_config(apply_overrides(document, overrides))
    logger.debug(f'Loaded configuration from {path or "defaults"}')
    return cfg


# ---------------------------------------------------------------- #
# ---------                 Serialization                --------- #
# ---------------------------------------------------------------- #
def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    """Return the full document of ``cfg``, every key present."""
    return {name: asdict(getattr(cfg, name)) for name in _SECTIONS}


def dump_config(cfg: RunConfig) -> str:
    """Serialize ``cfg`` as JSON text that :func:`load_config` reads back unchanged."""
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2) + '\n'
