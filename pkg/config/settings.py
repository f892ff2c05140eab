"""
Runtime settings for PVC-MC.

This module centralizes access to the environment variables that control where
runs are written, how many experiment cells run in parallel, and logging.
"""

from __future__ import annotations

from dataclasses import dataclass
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv, find_dotenv

from src.utils.errors import ConfigError

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(frozen=True)
class RuntimeSettings:
    """
    Holds the environment-driven settings shared by the CLI and the MCP server.
    """
    out_dir: Path
    jobs: int
    log_level: str
    log_file: Optional[str]


def _load_env_file() -> None:
    # Find .env relative to the project root so the working directory does not matter
    env_path = find_dotenv()
    if env_path:
        load_dotenv(dotenv_path=env_path)
        return
    env_file = Path(__file__).parent.parent / ".env"
    if env_file.exists():
        load_dotenv(dotenv_path=str(env_file))
    else:
        load_dotenv()


def load_settings() -> RuntimeSettings:
    """
    Loads runtime settings from environment variables (and .env if present).

    Raises ConfigError if PVCMC_JOBS is not a positive integer or
    PVCMC_LOG_LEVEL is not a known level.
    """
    _load_env_file()

    raw_jobs = os.getenv("PVCMC_JOBS", "1")
    try:
        jobs = int(raw_jobs)
    except ValueError:
        raise ConfigError(f"PVCMC_JOBS must be an integer, got {raw_jobs!r}")
    if jobs < 1:
        raise ConfigError(f"PVCMC_JOBS must be >= 1, got {jobs}")

    log_level = os.getenv("PVCMC_LOG_LEVEL", "INFO").upper()
    if log_level not in LOG_LEVELS:
        raise ConfigError(f"PVCMC_LOG_LEVEL must be one of {LOG_LEVELS}, got {log_level!r}")

    return RuntimeSettings(
        out_dir=Path(os.getenv("PVCMC_OUT_DIR", "runs")),
        jobs=jobs,
        log_level=log_level,
        log_file=os.getenv("PVCMC_LOG_FILE"),
    )


__all__ = ["RuntimeSettings", "load_settings"]
