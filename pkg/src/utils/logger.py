"""
Flight Recorder: Centralized logging system for PVC-MC.

This module provides a configured logger that writes to both:
1. File: pvc_mc.log (in project root, or PVCMC_LOG_FILE) - for persistent debugging
2. Console: stderr - WARNING and above only, stdout belongs to the CLI and MCP protocol

Privacy Rules:
- DO NOT log full matrices or datasets (log shapes, counts and seeds only)

CLI Design System Colors:
- Success: Green (DONE, CONVERGED)
- Error: Red (FAILED, DIVERGED)
- Info/Log: Dimmed Gray
- Warning: Yellow
"""

import logging
import os
import re
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

# ANSI Color Codes (CLI Design System)
COLOR_RESET = "\033[0m"
COLOR_GREEN = "\033[92m"    # Success
COLOR_RED = "\033[91m"      # Error
COLOR_YELLOW = "\033[93m"   # Warning
COLOR_GRAY = "\033[90m"     # Info/Log (Dimmed Gray)

MAX_MESSAGE_LENGTH = 2000


def _compact_message(message: str) -> str:
    """
    Collapse multi-line array reprs and truncate runaway messages.

    Keeps accidental `logger.info(f"... {matrix}")` calls from dumping an
    n x n coefficient matrix into the log file.
    """
    compacted = re.sub(r"\s*\n\s*", " ", message)
    if len(compacted) > MAX_MESSAGE_LENGTH:
        compacted = compacted[:MAX_MESSAGE_LENGTH] + " ...[truncated]"
    return compacted


class ColorFormatter(logging.Formatter):
    """[PVC-MC] Message, colored by level."""

    def __init__(self, use_color: bool = True):
        super().__init__()
        self.use_color = use_color

    def format(self, record):
        formatted_message = f"[PVC-MC] {record.getMessage()}"
        if record.exc_info:
            formatted_message = f"{formatted_message}\n{self.formatException(record.exc_info)}"

        if not self.use_color:
            return formatted_message

        if record.levelno >= logging.ERROR:
            return f"{COLOR_RED}{formatted_message}{COLOR_RESET}"
        if record.levelno >= logging.WARNING:
            return f"{COLOR_YELLOW}{formatted_message}{COLOR_RESET}"
        return f"{COLOR_GRAY}{formatted_message}{COLOR_RESET}"


def _resolve_log_file() -> Path:
    override = os.getenv("PVCMC_LOG_FILE")
    if override:
        return Path(override)
    # This file is in src/utils/, so go up 2 levels to get project root
    project_root = Path(__file__).parent.parent.parent
    return project_root / "pvc_mc.log"


def setup_logger(name: str = "pvc-mc") -> logging.Logger:
    """
    Configure and return a logger instance for PVC-MC.

    Args:
        name: Logger name (default: "pvc-mc")

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Prevent duplicate handlers if logger is already configured
    if logger.handlers:
        return logger

    logger.propagate = False
    level_name = os.getenv("PVCMC_LOG_LEVEL", "INFO").upper()
    logger.setLevel(getattr(logging, level_name, logging.INFO))

    # Handler 1: rotating file, max 5MB per file, keep 3 backups
    try:
        file_handler = RotatingFileHandler(
            _resolve_log_file(),
            maxBytes=5 * 1024 * 1024,
            backupCount=3,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(ColorFormatter(use_color=False))
        logger.addHandler(file_handler)
    except OSError:
        # Read-only checkouts still get console logging
        pass

    # Handler 2: console (stderr, WARNING+ only)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.WARNING)
    console_handler.setFormatter(ColorFormatter(use_color=True))
    logger.addHandler(console_handler)

    return logger


# Create module-level logger instance
logger = setup_logger()

_original_info = logger.info
_original_error = logger.error
_original_warning = logger.warning
_original_debug = logger.debug
_original_exception = logger.exception


def _wrap_log_method(original_method):
    """Wrapper to compact log messages before logging."""
    def wrapper(message, *args, **kwargs):
        if isinstance(message, str):
            message = _compact_message(message)
        return original_method(message, *args, **kwargs)
    return wrapper


def _success(message, *args, **kwargs):
    """Log a success message in green."""
    if isinstance(message, str):
        message = _compact_message(message)
    return _original_info(f"{COLOR_GREEN}{message}{COLOR_RESET}", *args, **kwargs)


logger.info = _wrap_log_method(_original_info)
logger.error = _wrap_log_method(_original_error)
logger.warning = _wrap_log_method(_original_warning)
logger.debug = _wrap_log_method(_original_debug)
logger.exception = _wrap_log_method(_original_exception)
logger.success = _success
