"""
ALE-SBM configuration: paths, numerical constants, environment overrides.
"""
import os
from pathlib import Path

# ---------------------------------------------------------------------------
# Paths / environment, override with ALESBM_* env vars
# ---------------------------------------------------------------------------
OUTPUT_FOLDER = Path(os.environ.get("ALESBM_OUTPUT_DIR", str(Path.cwd() / "output")))
THREADS = max(1, int(os.environ.get("ALESBM_THREADS", "1")))
LOG_LEVEL = os.environ.get("ALESBM_LOG_LEVEL", "INFO").upper()

PACKAGE_DIR = Path(__file__).resolve().parent
SAMPLE_MESH_DIR = PACKAGE_DIR / "mesh" / "samples"

# ---------------------------------------------------------------------------
# Discretisation
# ---------------------------------------------------------------------------
SUPPORTED_DEGREES = (1, 2, 3)
DEFAULT_DEGREE = 2
DEFAULT_CFL = 0.5
MAX_QUADRATURE_DEGREE = 8

# ---------------------------------------------------------------------------
# WENO reconstruction
# ---------------------------------------------------------------------------
WENO_EPSILON = 1e-14
WENO_EXPONENT = 8
WENO_LAMBDA_CENTRAL = 1e5
WENO_LAMBDA_SECTOR = 1.0
STENCIL_FACTOR = 2            # n_s = STENCIL_FACTOR * D
STENCIL_SEARCH_DEPTH = 8      # adjacency layers searched for sector members
RECONSTRUCTION_RCOND = 1e-10  # pivoted-QR diagonal ratio below which a stencil is rank deficient
RECONSTRUCTION_CHUNK = 2048   # cells per batched least-squares block

# ---------------------------------------------------------------------------
# Space-time predictor
# ---------------------------------------------------------------------------
PREDICTOR_TOLERANCE = 1e-12
PREDICTOR_SWEEP_FACTOR = 2    # max sweeps = factor * (M + 1)

# ---------------------------------------------------------------------------
# Harmonic mesh motion
# ---------------------------------------------------------------------------
HARMONIC_TOLERANCE = 1e-10
HARMONIC_ITERATION_FACTOR = 10  # max CG iterations = factor * sqrt(n)

# ---------------------------------------------------------------------------
# Fluxes, boundaries, time stepping
# ---------------------------------------------------------------------------
OSHER_PATH_POINTS = 3
PROJECTION_GUARD_DIAMETERS = 2.0
TIMESTEP_UNDERFLOW = 1e-14    # relative to the final time
TIMESTEP_MAX_HALVINGS = 60
TIME_EPSILON = 1e-12          # relative slack when matching snapshot times

# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------
VTK_HEADER = "# vtk DataFile Version 3.0"
REPORT_FILENAME = "report.json"
TIMINGS_FILENAME = "timings.json"
CONSERVATION_FILENAME = "conservation.csv"
SCATTER_FILENAME = "kidder_scatter.csv"
CONVERGENCE_BASENAME = "convergence"
