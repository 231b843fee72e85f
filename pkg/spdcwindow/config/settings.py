from importlib.metadata import version

__all__ = [
    'PACKAGE_NAME',
    'PACKAGE_VERSION',
    'KATO_BBO_COEFFICIENTS',
    'DEFAULT_LAMBDA_PUMP_NM',
    'DEFAULT_CRYSTAL_LENGTH_MM',
    'DEFAULT_CUT_ANGLE_DEG',
    'DEFAULT_COMP_THICKNESS_MM',
    'DEFAULT_COMP_CUT_ANGLE_DEG',
    'DEFAULT_FILTER_FWHM_NM',
    'EXIT_CODES',
    'OUTPUT_FILES',
]

# Package metadata from installed package
PACKAGE_NAME = 'spdcwindow'
PACKAGE_VERSION = version(PACKAGE_NAME)

# Kato (1986) BBO dispersion, wavelength in um
KATO_BBO_COEFFICIENTS = {
    'a_o': 2.7359,
    'b_o': 0.01878,
    'c_o': 0.01822,
    'd_o': 0.01354,
    'a_e': 2.3753,
    'b_e': 0.01224,
    'c_e': 0.01667,
    'd_e': 0.01516,
    'lambda_min_um': 0.22,
    'lambda_max_um': 1.06,
}

# Source of the reference setup: 351.1 nm pump on two 0.59 mm BBO crystals
DEFAULT_LAMBDA_PUMP_NM = 351.1
DEFAULT_CRYSTAL_LENGTH_MM = 0.59
DEFAULT_CUT_ANGLE_DEG = 33.9
# Two compensation elements, one per arm, share 0.59 mm of BBO
DEFAULT_COMP_THICKNESS_MM = 0.295
DEFAULT_COMP_CUT_ANGLE_DEG = 33.9
DEFAULT_COMP_TILT_DEG = 0.0
DEFAULT_PHI_0_RAD = 0.0
DEFAULT_CRYSTAL_ORDER = 'vv_first'
SUPPORTED_CRYSTAL_ORDERS = ['vv_first', 'hh_first']

DEFAULT_FILTER_FWHM_NM = 70.0

# Map grid
DEFAULT_THETA_MIN_DEG = 0.0
DEFAULT_THETA_MAX_DEG = 6.0
DEFAULT_LAMBDA_MIN_NM = 602.0
DEFAULT_LAMBDA_MAX_NM = 802.0
DEFAULT_N_THETA = 512
DEFAULT_N_LAMBDA = 512

# Flux quadrature and phase-range sampling
DEFAULT_FLUX_N_LAMBDA = 800
DEFAULT_FLUX_MAX_THETA_STEP_DEG = 0.005
DEFAULT_REGION_POINTS = 101

# Opening-angle search
OPENING_ANGLE_BRACKET_DEG = (0.0, 10.0)
DELTA_KAPPA_TOL = 1e-10

# Compensation calibration
CALIBRATION_HALF_THETA_DEG = 0.25
CALIBRATION_HALF_LAMBDA_NM = 10.0
CALIBRATION_POINTS = 41
CALIBRATION_TILT_BOUNDS_DEG = (-10.0, 10.0)
CALIBRATION_TILT_XTOL_RAD = 1e-4
CALIBRATION_SCAN_POINTS = 21

# Iso-flux optimization
DEFAULT_REFERENCE_FWHM_NM = 30.0
DEFAULT_REFERENCE_WIDTH_DEG = 0.5
DEFAULT_FWHM_MIN_NM = 5.0
DEFAULT_FWHM_MAX_NM = 100.0
DEFAULT_FWHM_STEP_NM = 5.0
DEFAULT_FLUX_RTOL = 1e-6
DEFAULT_MAX_ITERATIONS = 200
DEFAULT_MAX_WORKERS = 1
MIN_IRIS_WIDTH_RAD = 1e-5
MAX_IRIS_WIDTH_DEG = 6.0
SUPPORTED_PHASE_METRICS = ['peak_to_peak', 'weighted_std']
DEFAULT_PHASE_METRIC = 'peak_to_peak'

# Output
DEFAULT_OUTPUT_DIR = 'results'
OUTPUT_FILES = {
    'maps': 'maps.csv',
    'maps_meta': 'maps_meta.json',
    'isoflux': 'isoflux.csv',
    'optimum': 'optimum.json',
    'phasematch': 'phasematch.json',
}

# Command line exit codes
EXIT_CODES = {
    'success': 0,
    'internal': 1,
    'parse': 2,
    'validation': 3,
    'io': 4,
    'infeasible': 5,
}
