import os
from pathlib import Path
from typing import List

from dotenv import find_dotenv, load_dotenv

# .env in the working directory (or a parent) feeds the constants below
load_dotenv(find_dotenv(usecwd=True))

# --- Project layout ---
# config.py is in src/qae_lab/config.py
# .parent.parent.parent is the project root.
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
PLANS_DIR = PROJECT_ROOT / "plans"

# --- Runtime settings (overridable via environment variables / .env) ---
DEFAULT_LOG_LEVEL = "INFO"
LOG_LEVEL = os.environ.get("QAE_LAB_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

DEFAULT_OUTPUT_DIR = "results"
OUTPUT_DIR = Path(os.environ.get("QAE_LAB_OUTPUT_DIR", DEFAULT_OUTPUT_DIR))

DEFAULT_WORKERS = 1
WORKERS = int(os.environ.get("QAE_LAB_WORKERS", DEFAULT_WORKERS))

# --- Simulator limits ---
# 20 qubits = 2^20 complex doubles = 16 MB per state
DEFAULT_MAX_QUBITS = 20
MAX_QUBITS = int(os.environ.get("QAE_LAB_MAX_QUBITS", DEFAULT_MAX_QUBITS))

# Registers up to this size get a dense Grover unitary (2^10 x 2^10 = 16 MB)
DEFAULT_DENSE_MAX_QUBITS = 10
DENSE_MAX_QUBITS = int(os.environ.get("QAE_LAB_DENSE_MAX_QUBITS", DEFAULT_DENSE_MAX_QUBITS))

MAX_GROVER_POWER = 2**20
NORM_TOLERANCE = 1e-12

# --- Table defaults: alpha, shots, epsilon, q, max_iter ---
DEFAULT_ALPHA = 0.05
DEFAULT_EPSILON = 1e-3
DEFAULT_SHOTS = 100
DEFAULT_N_QUBITS = 4
DEFAULT_MAX_ITER = 3
DEFAULT_REPETITIONS = 10
DEFAULT_LEVEL = 0.95
DEFAULT_SEED = 2024

# Sampling-based estimators stop after this many rounds
MAX_ROUNDS = 10_000

# --- Output formats ---
SWEEP_CSV_NAME = "sweep.csv"
BOUNDS_CSV_NAME = "bounds.csv"
TABLES_JSON_NAME = "tables.json"
TABLES_TEXT_NAME = "tables.txt"

SWEEP_COLUMNS: List[str] = [
    "row_key",
    "estimator",
    "distribution",
    "statistic",
    "budget_param",
    "budget",
    "repetition",
    "seed",
    "grover_applications",
    "oracle_queries_A",
    "shots_total",
    "max_k",
    "max_circuit_depth",
    "estimate",
    "reference",
    "relative_error",
    "ci_low",
    "ci_high",
    "ci_width",
    "converged",
    "error",
]

BOUNDS_COLUMNS: List[str] = [
    "epsilon",
    "alpha",
    "mlae_lower",
    "cp_upper",
    "iqae_upper",
    "fae_upper",
    "cmc_ref",
]


# --- Config Class ---
class Config:
    """Runtime configuration for the qae-lab CLI."""

    def __init__(self, workers: int | None = None, output_dir: str | Path | None = None):
        # read at construction so a .env loaded after import still applies
        self.log_level = os.environ.get("QAE_LAB_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
        if workers is None:
            workers = int(os.environ.get("QAE_LAB_WORKERS", DEFAULT_WORKERS))
        self.workers = workers
        if output_dir is None:
            output_dir = os.environ.get("QAE_LAB_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)
        self.output_dir = Path(output_dir)
        self.max_qubits = int(os.environ.get("QAE_LAB_MAX_QUBITS", DEFAULT_MAX_QUBITS))
        self.dense_max_qubits = int(os.environ.get("QAE_LAB_DENSE_MAX_QUBITS", DEFAULT_DENSE_MAX_QUBITS))

        self._validate()

    def _validate(self):
        """Validate that the runtime settings make sense."""
        if self.workers < 1:
            raise ValueError(f"Worker count must be at least 1, got {self.workers}")

        if not 1 <= self.max_qubits <= 30:
            raise ValueError(f"QAE_LAB_MAX_QUBITS must be in [1, 30], got {self.max_qubits}")

        if self.dense_max_qubits > self.max_qubits:
            raise ValueError(
                "QAE_LAB_DENSE_MAX_QUBITS cannot exceed QAE_LAB_MAX_QUBITS "
                f"({self.dense_max_qubits} > {self.max_qubits})"
            )

    def apply(self) -> None:
        """Make these qubit limits the ones the simulator enforces."""
        global MAX_QUBITS, DENSE_MAX_QUBITS
        MAX_QUBITS = self.max_qubits
        DENSE_MAX_QUBITS = self.dense_max_qubits
