import os

PROJECT_NAME: str = "bandrmt"

ARTIFACT_DIR: str = "artifact"
EXPERIMENT_CONFIG_FILE_PATH = os.path.join("config", "experiment.yaml")

"""
Logging related constants start with LOG VAR NAME
"""
LOG_DIR: str = "logs"
LOG_MAX_BYTES: int = 5 * 1024 * 1024
LOG_BACKUP_COUNT: int = 3
LOG_CONSOLE_LEVEL: str = "INFO"
LOG_LEVEL_ENV_KEY: str = "BANDRMT_LOG_LEVEL"


"""
Pair partition enumeration related constants start with ENUMERATION VAR NAME
"""
ENUMERATION_MAX_ELL: int = 8
ENUMERATION_CHUNK_SIZE: int = 4096

"""
Admissible label counting related constants start with COUNTING VAR NAME
"""
COUNTING_NODE_BUDGET: int = 5_000_000
PERIODIC_MODE: str = "periodic"
REGULAR_MODE: str = "regular"
BAND_MODES = (PERIODIC_MODE, REGULAR_MODE)

"""
Genus-one limit integral related constants start with INTEGRAL VAR NAME
"""
INTEGRAL_DEFAULT_SAMPLES: int = 200_000
INTEGRAL_CHUNK_SIZE: int = 100_000
INTEGRAL_DEFAULT_SEED: int = 20190423

"""
Free harmonic analysis related constants
"""
QUADRATURE_NODES: int = 512
SUBORDINATION_TOL: float = 1e-13
SUBORDINATION_MAX_ITER: int = 10_000
SUBORDINATION_NEWTON_STEPS: int = 30
SUBORDINATION_RESIDUAL_TOL: float = 1e-10
# solved points kept per solver; the oldest are evicted first
SUBORDINATION_CACHE_SIZE: int = 50_000
DERIVATIVE_STEP: float = 1e-6
# generic evaluators (quadrature-backed transforms)
STIELTJES_ETA_LADDER = (1e-2, 5e-3, 2.5e-3)
# subordination outputs are solved pointwise, so they afford a much finer ladder
SUBORDINATION_ETA_LADDER = (1e-6, 5e-7, 2.5e-7)
ATOM_THRESHOLD: float = 1e-3
ATOM_SEARCH_ETA: float = 1e-10
MASS_TOL: float = 1e-6
DEFAULT_GRID_LO: float = -3.0
DEFAULT_GRID_HI: float = 3.0
DEFAULT_GRID_N: int = 601

"""
Monte Carlo simulation related constants start with SIMULATION VAR NAME
"""
SIMULATION_DESK_N: int = 1296
SIMULATION_REFERENCE_N: int = 7776
SIMULATION_DEFAULT_THETA: float = 2.0
SIMULATION_DEFAULT_SIGMA2: float = 1.0
SIMULATION_DEFAULT_REPS: int = 500
SIMULATION_DEFAULT_SEED: int = 7776
SIMULATION_COST_WARNING: float = 5e11
HISTOGRAM_BINS: int = 40
HISTOGRAM_RANGE = (-4.0, 4.0)

REALIZATIONS_FILE_NAME: str = "realizations.csv"
HISTOGRAM_FILE_NAME: str = "histogram.csv"
MANIFEST_FILE_NAME: str = "manifest.json"
SUMMARY_OBJECT_FILE_NAME: str = "summary.pkl"
DENSITY_FILE_NAME: str = "density.csv"
ATOMS_FILE_NAME: str = "atoms.json"
QQ_FILE_NAME: str = "qq.csv"

"""
Process exit codes of the command line surface
"""
EXIT_OK: int = 0
EXIT_USAGE: int = 1
EXIT_CAP: int = 2
EXIT_RESOURCE: int = 3
EXIT_NUMERIC: int = 4
EXIT_CONVERGENCE: int = 5
