"""Configuration for the Liouvillian forms toolkit."""

from __future__ import annotations

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def _env_float(key: str, default: float) -> float:
    raw = os.getenv(key)
    if raw is None or raw == "":
        return default
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"{key} must be a number, got '{raw}'") from exc
    if value <= 0:
        raise ValueError(f"{key} must be positive, got {value}")
    return value


def _env_int(key: str, default: int) -> int:
    raw = os.getenv(key)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{key} must be an integer, got '{raw}'") from exc
    if value < 1:
        raise ValueError(f"{key} must be at least 1, got {value}")
    return value


OUTPUT_DIR = Path(os.getenv("LIOUFORM_OUTPUT_DIR", "./output"))

# Sweep parallelism cap
THREADS = _env_int("LIOUFORM_THREADS", min(os.cpu_count() or 1, 8))

# Algebraic identities have O(1) entries, so roundoff stays near 1e-16
DEFAULT_TOL = _env_float("LIOUFORM_TOL", 1e-12)

# Implicit step solver
SOLVER_TOL = _env_float("LIOUFORM_SOLVER_TOL", 1e-13)
MAX_ITERATIONS = _env_int("LIOUFORM_MAX_ITER", 100)

# Central differences for step Jacobians
FD_EPSILON = _env_float("LIOUFORM_FD_EPSILON", 1e-6)
FD_SYMPLECTIC_TOL = 1e-5

KEPLER_MIN_RADIUS = 1e-8
CSV_FLOAT_FORMAT = "%.17g"
DEFAULT_SEED = 7
