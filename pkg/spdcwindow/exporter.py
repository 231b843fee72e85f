"""Writers for the CSV and JSON artifacts of a run.

CSV cells use the shortest decimal representation that round-trips the
float, and JSON documents are key-sorted, so identical runs produce
byte-identical files.
"""

import json
import logging
from typing import Any
from pathlib import Path

import pandas as pd

from spdcwindow.models import ModeGrid, IsoFluxCurve
from spdcwindow.exceptions import OutputError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

__all__ = [
    'ensure_output_dir',
    'write_frame_csv',
    'write_maps_csv',
    'write_isoflux_csv',
    'write_json',
]


def ensure_output_dir(directory: str | Path) -> Path:
    """Create ``directory`` (and parents) if needed.

    Raises:
        OutputError: If the directory cannot be created.
    """
    path = Path(directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f'Cannot create output directory {path}: {e}')
        raise OutputError(f'Cannot create output directory {path}: {e}') from e
    return path


def write_frame_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    """Write ``frame`` without index; missing values become empty cells.

    Raises:
        OutputError: If the file cannot be written.
    """
    path = Path(path)
    try:
        frame.to_csv(path, index=False, na_rep='', lineterminator='\n')
    except OSError as e:
        logger.error(f'Cannot write {path}: {e}')
        raise OutputError(f'Cannot write {path}: {e}') from e
    logger.info(f'Wrote {path} ({len(frame)} rows)')
    return path


def write_maps_csv(maps: ModeGrid, path: str | Path) -> Path:
    """Write the maps as ``theta_deg,lambda_nm,P,phi_rad`` rows."""
    return write_frame_csv(maps.to_frame(), path)


def write_isoflux_csv(curve: IsoFluxCurve, path: str | Path) -> Path:
    """Write one row per curve point, in scan order."""
    return write_frame_csv(curve.to_frame(), path)


def write_json(payload: dict[str, Any], path: str | Path) -> Path:
    """Write ``payload`` as key-sorted, indented JSON with a trailing newline.

    Raises:
        OutputError: If the file cannot be written.
    """
    path = Path(path)
    text = json.dumps(payload, sort_keys=True, indent=2) + '\n'
    try:
        path.write_text(text, encoding='utf-8')
    except OSError as e:
        logger.error(f'Cannot write {path}: {e}')
        raise OutputError(f'Cannot write {path}: {e}') from e
    logger.info(f'Wrote {path}')
    return path
