import os

from dotenv import load_dotenv

from config.base import ENV_FILE

load_dotenv(ENV_FILE)


# -------------------- QUADRATURE SETTINGS --------------------

MAX_QUADRATURE_ORDER = 512

# Laguerre integrals over [a, inf) are truncated at a + LAGUERRE_TRUNCATION
LAGUERRE_TRUNCATION = 250.0
PANEL_WIDTH = 10.0
PANEL_ORDER = 40


# -------------------- AIRY SETTINGS --------------------

AIRY_DOMAIN = (-12.0, 40.0)
AIRY_SWITCH = 7.0


# -------------------- KERNEL SETTINGS --------------------

PIVOT_FLOOR = 1e-300
CDF_ROUTE_TOLERANCE = 1e-9
CDF_ROUTE_FACTOR = 100.0
CLOSED_FORM_MAX_N = 25
TABLE_MONOTONE_SLACK = 1e-12


# -------------------- FREDHOLM SETTINGS --------------------

FREDHOLM_ORDER = 64
FREDHOLM_TRUNCATION = 12.0
FREDHOLM_MAX_ORDER = 256
FREDHOLM_TOLERANCE = 1e-8
FREDHOLM_R_RANGE = (-10.0, 10.0)


# -------------------- MONTE CARLO SETTINGS --------------------

DEFAULT_SEED = 0x5EED_0001

JACOBI_TOLERANCE = 1e-11
JACOBI_MAX_SWEEPS = 30

DEFAULT_PATH_STEPS = 2000
# Interior grid points of the uniform-in-s grid cover s in [-S_MAX, S_MAX]
PATH_S_MAX = 4.0
PAIRING_TOLERANCE = 1e-9
# Bridge normals are drawn per sample in blocks of this many time steps
PATH_NORMAL_BLOCK = 256

# Rough cap on floats held per worker chunk
CHUNK_FLOAT_BUDGET = 4_000_000

THREADS_ENV_VAR = "BRIDGE_LOE_THREADS"


def worker_count() -> int:
    """
    Number of Monte Carlo worker processes.

    Reads BRIDGE_LOE_THREADS (also from .env); defaults to all cores.

    Returns:
        int: Positive worker count
    """
    raw = os.getenv(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1

    try:
        value = int(raw)
    except ValueError:
        value = 0

    if value < 1:
        # Imported here so that config stays importable on its own
        from model.errors import ArgumentError

        raise ArgumentError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")

    return value


# -------------------- VERIFY SETTINGS --------------------

ALGEBRAIC_TOLERANCE = 1e-9
L_IDENTITY_TOLERANCE = 1e-8
DERIVATIVE_STEP = 1e-4
DERIVATIVE_TOLERANCE = 1e-5
DERIVATIVE_R_FLOOR = 0.25
# resolvent derivative checks run only where cond(I - Htilde^2) stays below this
DERIVATIVE_COND_LIMIT = 1e6

POLYNOMIAL_TOLERANCE = 1e-9
LAGUERRE_SUM_TOLERANCE = 1e-10

REFLECTION_TOLERANCE = 1e-7
REFLECTION_HORIZONS = (0.5, 1.0, 2.0)
REFLECTION_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0)

PATH_INTEGRAL_TOLERANCES = {1: 1e-6, 2: 1e-4}
PATH_INTEGRAL_M_GRID = (0.4, 0.7, 1.0, 1.5, 2.0, 3.0)
# Gaussian weight e^{-y^2/2m^2} is cut where it drops below e^{-37}
PATH_INTEGRAL_CUTOFF = 37.0

DECAY_HORIZONS = (1.0, 1.5, 2.0, 2.5)


# -------------------- CLI SETTINGS --------------------

DEFAULT_R_SET = (0.5, 1.0, 2.0)
DEFAULT_VERIFY_N_MAX = 8
DEFAULT_MC_SAMPLES = 10_000
LOE_KS_THRESHOLD = 0.02
BRIDGE_KS_THRESHOLD = 0.025

TW_N_LIST = (8, 16, 32)
TW_GRID = "-4:2:25"
# Bridge and LOE soft-edge scalings of one finite-N law must agree this closely
TW_MATCHED_TOLERANCE = 1e-9

# CSV floats carry 17 significant digits
CSV_FLOAT_FORMAT = "%.17g"
