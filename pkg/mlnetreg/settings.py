import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

# Load environment variables from .env if present
load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_EIG_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


def _env_bool(name: str, default: bool = False) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in {"1", "true", "yes", "on"}


def _read_int(name: str, default: int, *, minimum: int = 0) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        value = int(raw)
        if value < minimum:
            raise ValueError
        return value
    except ValueError:
        logger.warning("Invalid %s value %r; falling back to default", name, raw)
        return default


def _read_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        value = float(raw)
        if value <= 0:
            raise ValueError
        return value
    except ValueError:
        logger.warning("Invalid %s value %r; falling back to default", name, raw)
        return default


def get_thread_count() -> int:
    """Return the replication parallelism cap from ``MLNETREG_THREADS``."""

    return _read_int("MLNETREG_THREADS", 1, minimum=1)


def get_eig_tol() -> float:
    return _read_float("MLNETREG_EIG_TOL", DEFAULT_EIG_TOL)


def get_max_iter() -> int:
    return _read_int("MLNETREG_MAX_ITER", DEFAULT_MAX_ITER, minimum=1)


def get_log_level() -> str:
    return os.getenv("MLNETREG_LOG_LEVEL", "INFO").upper()


def progress_enabled() -> bool:
    return _env_bool("MLNETREG_PROGRESS", False)


def get_run_log_dir() -> Optional[Path]:
    """Directory for JSONL run logs, or ``None`` when file logging is off."""

    raw = os.getenv("MLNETREG_RUN_LOG_DIR")
    if not raw:
        return None
    return Path(raw).expanduser()


def get_log_retention_days() -> int:
    return _read_int("MLNETREG_LOG_RETENTION_DAYS", 7)
