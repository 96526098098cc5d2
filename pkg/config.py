"""
Centralized configuration constants for the Ritt operator lab
"""
import os

from dotenv import load_dotenv

load_dotenv()

# ==================== LINEAR ALGEBRA ====================
EIG_DIM_CAP = 256
NORM_REL_TOL = 1e-8
NORM_MAX_ITER = 10000
RESOLVENT_RESIDUAL_TOL = 1e-10
ILL_CONDITIONED_EIGVEC = 1e8
ORACLE_COND_CAP = 1e6
SINGULAR_SIGMA_MIN = 1e-10

# ==================== QUADRATURE ====================
GAUSS_ORDER = 16
GRADING_LEVELS = 8  # dyadic shells toward each endpoint
LEVELS_PER_REFINEMENT = 2
MAX_DOUBLINGS = 20
MAX_CONTOUR_NODES = 2_000_000
CALC_MAX_REFINEMENTS = 4
CALC_TOL = 1e-10
RESOLVENT_CACHE_BYTES = 256 * 2 ** 20  # per ContourCalculus; the newest stack is always kept
ADMISSIBILITY_REFINEMENTS = 3
ADMISSIBILITY_REL_CHANGE = 0.05
ADMISSIBILITY_SHELL_RATIO = 0.95
ADMISSIBILITY_GROWTH = 2.0
SUP_GRID_DENSITY = 2048
SUP_RICHARDSON_TOL = 0.01
SUP_MAX_DOUBLINGS = 6
PROJECTOR_NODES = 64

# ==================== DIAGNOSTICS ====================
RITT_RADII_J = 20
RITT_ANGLES = 128
RITT_GROWTH_WINDOW = 5
RITT_GROWTH_RATIO = 1.5
VERTEX_TOL = 1e-9
POWER_HORIZON = 200
DD_HORIZON = 200
OVERFLOW = 1e12
POWER_GROWTH_RATIO = 1.5
DD_RITT_SLOPE = 0.1
DD_LINEAR_SLOPE = 0.9
TANGENTIAL_STOLZ_TYPE = 10.0  # spectra this close to tangential push in-between dd slopes to not-Ritt
ERGODIC_TOL = 1e-8
SEMISIMPLE_TOL = 1e-6

# ==================== MONTE CARLO ====================
MC_SAMPLES = 4096
MC_BATCHES = 16
RBOUND_TRIALS = 64
RBOUND_SIGN_SAMPLES = 256
RBOUND_FAMILY_SIZE = 32
EXACT_ENUMERATION_MAX = 12
RBOUND_ASCENT_STEPS = 24  # accepted-or-rejected perturbations of the best trial
RBOUND_ASCENT_STEP = 0.25
PROBE_COUNT = 32

# ==================== SQUARE FUNCTIONS ====================
SQF_REL_TAIL = 1e-12
SQF_MAX_TERMS = 200000
SQF_MC_REL_TAIL = 1e-6
SQF_CHUNK_MAX = 1024
SQF_ACCEPT_TAIL = 0.01
CHECKPOINT_MAX_EXPONENT = 16  # checkpoints T^(2^i), i < 16

# ==================== H-INFINITY ====================
HINF_BUDGET = 32
HINF_RANDOM_POLYS = 16
HINF_POLY_DEGREE = 32
LEMMA_DECAY_FACTOR = 1e-2

# ==================== BASIS ====================
PAIRING_REL_TAIL = 1e-3
PAIRING_MAX_TERMS = 2_000_000
POLYLOG_REL_TAIL = 1e-11
POLYLOG_ASYMPTOTIC_FROM = 0.9999
POLYLOG_ASYMPTOTIC_TERMS = 12
CLOSED_FORM_TOL = 1e-12
SWEEP_GRID_POINTS = 500
SWEEP_CLOSEST = 1e-4
STOLZ_PATCH_RHO_MIN = 0.05
STOLZ_PATCH_RHO_MAX = 2.0

# ==================== IDENTITIES ====================
IDENTITY_K = 500
MULTIPLIER_HEAD = 20000
CONTOUR_L1_KS = [1, 10, 100, 1000, 10000]
CONTOUR_L1_TOL = 1e-8

# ==================== RUNTIME ====================
DEFAULT_SEED = int(os.getenv('RITTLAB_SEED', '0'))
DEFAULT_THREADS = int(os.getenv('RITTLAB_THREADS', '1'))
LOG_LEVEL = os.getenv('RITTLAB_LOG_LEVEL', 'INFO')
REPORT_SCHEMA_VERSION = 1

# ==================== TIMEZONE ====================
DEFAULT_TIMEZONE = os.getenv('TIMEZONE', 'UTC')

# ==================== DATABASE ====================
LEDGER_URL = os.getenv('RITTLAB_LEDGER_URL', '')
LEDGER_FILENAME = 'ledger.db'
