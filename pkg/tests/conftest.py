import math
from pathlib import Path

import pytest

from spdcwindow.models import QuadratureSpec
from spdcwindow.loader import RunConfig
from spdcwindow.physics.spdc_model import calibrate_compensation

RESOURCES_DIR = Path(__file__).parent / 'resources'


# -----------------------------------
# ----      PyTest Fixtures      ----
# -----------------------------------
@pytest.fixture(scope='session')
def resources_dir():
    if not RESOURCES_DIR.exists():
        raise FileNotFoundError(
            f'Resource directory does not exist: {RESOURCES_DIR}'
        )
    return RESOURCES_DIR


@pytest.fixture(scope='session')
def source_cfg():
    """Reference setup, compensation not yet calibrated."""
    return RunConfig().source_config()


@pytest.fixture(scope='session')
def calibrated_cfg(source_cfg):
    return calibrate_compensation(source_cfg)


@pytest.fixture(scope='session')
def coarse_quadrature():
    """Cheap flux quadrature over the default map range."""
    return QuadratureSpec(
        theta_min=0.0,
        theta_max=math.radians(6.0),
        lambda_min=602.0,
        lambda_max=802.0,
        n_lambda=100,
        max_theta_step=math.radians(0.02),
        region_points=21,
    )
