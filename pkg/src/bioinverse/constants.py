"""Numerical defaults, exit codes and names shared across bioinverse.

Keeping the tuning constants in one place makes it obvious which numbers are
choices and which are derived. Everything here can be overridden through the
run configuration.
"""

# Finite-difference perturbation x_i + alpha + beta * x_i
FD_ALPHA = 1e-5
FD_BETA = 1e-3
PERTURBATION_UNDERFLOW = 1e-300

# Levenberg-Marquardt defaults
LM_MU0 = 1e-3
LM_MU_BLOWUP = 1e6  # terminate once mu > mu0 * LM_MU_BLOWUP
LM_EPS_GRAD = 1e-8
LM_EPS_RES = 0.0  # 0 disables the residual criterion
LM_N_MAX = 50
LM_DIAG_FLOOR = 1e-30
LM_CONDITION_LIMIT = 1e15

# Geometry
INTERSECTION_DEDUPE_MM = 1e-12
SEGMENT_PARAM_TOL = 1e-12
UNIT_VECTOR_TOL = 1e-12
MIN_SEGMENT_LENGTH_MM = 1e-9

# Bump surrogate
BUMP_RADIUS_MM = 0.3
BUMP_VERTICES = 181

# Finger geometry of the growth example
FINGER_WIDTH_MM = 0.04
FINGER_HEIGHT_MM = 0.1

# Diffusion-reaction solver
FLUX_NEWTON_TOL = 1e-12  # relative to phi_in
FLUX_NEWTON_MAX = 50
FLUX_MIN_GRID = 8

# Solid solver
FEM_NEWTON_TOL = 1e-10
FEM_MAX_NEWTON = 25
FEM_LOAD_INCREMENTS = 5
FEM_MAX_POISSON = 0.45

# Growth
GROWTH_DT_DEFAULT_S = 86400.0
LOAD_POSITION_TOL_MM = 1e-9

# Process exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_MU_BLOWUP = 3
EXIT_MODEL_FAILURE = 4
EXIT_MAX_ITERATIONS = 5
EXIT_NUMERICAL = 6
EXIT_INTERRUPTED = 130

# Environment
ENV_THREADS = "BIOINVERSE_THREADS"

# Noise generator recorded in provenance
NOISE_GENERATOR = "numpy.random.PCG64"
NOISE_TRANSFORM = "numpy.random.Generator.standard_normal (ziggurat)"

__all__ = [
    # Finite differences
    "FD_ALPHA",
    "FD_BETA",
    "PERTURBATION_UNDERFLOW",
    # Levenberg-Marquardt
    "LM_MU0",
    "LM_MU_BLOWUP",
    "LM_EPS_GRAD",
    "LM_EPS_RES",
    "LM_N_MAX",
    "LM_DIAG_FLOOR",
    "LM_CONDITION_LIMIT",
    # Geometry
    "INTERSECTION_DEDUPE_MM",
    "SEGMENT_PARAM_TOL",
    "UNIT_VECTOR_TOL",
    "MIN_SEGMENT_LENGTH_MM",
    # Models
    "BUMP_RADIUS_MM",
    "BUMP_VERTICES",
    "FINGER_WIDTH_MM",
    "FINGER_HEIGHT_MM",
    "FLUX_NEWTON_TOL",
    "FLUX_NEWTON_MAX",
    "FLUX_MIN_GRID",
    "GROWTH_DT_DEFAULT_S",
    "LOAD_POSITION_TOL_MM",
    # Solid solver
    "FEM_NEWTON_TOL",
    "FEM_MAX_NEWTON",
    "FEM_LOAD_INCREMENTS",
    "FEM_MAX_POISSON",
    # Exit codes
    "EXIT_OK",
    "EXIT_ERROR",
    "EXIT_CONFIG",
    "EXIT_MU_BLOWUP",
    "EXIT_MODEL_FAILURE",
    "EXIT_MAX_ITERATIONS",
    "EXIT_NUMERICAL",
    "EXIT_INTERRUPTED",
    # Environment and provenance
    "ENV_THREADS",
    "NOISE_GENERATOR",
    "NOISE_TRANSFORM",
]
