"""
Exception hierarchy for PVC-MC.

Library code raises these; only the outer surfaces (cli.py, server tools,
experiment cells) catch them and turn them into exit codes or status strings.
Each class also derives from the builtin it refines so callers that only know
about ValueError / RuntimeError keep working.
"""

from __future__ import annotations

from typing import Optional


class PVCMCError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(PVCMCError, ValueError):
    """Invalid configuration value or malformed config file."""


class DatasetError(PVCMCError, ValueError):
    """Dataset file could not be read or violates a dataset invariant."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        row: Optional[int] = None,
        column: Optional[int] = None,
    ):
        self.path = path
        self.row = row
        self.column = column
        location = []
        if path is not None:
            location.append(f"file={path}")
        if row is not None:
            location.append(f"row={row}")
        if column is not None:
            location.append(f"column={column}")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")


class ShapeError(PVCMCError, ValueError):
    """Operand shapes do not chain."""


class NumericalError(PVCMCError, FloatingPointError):
    """A tensor operation produced NaN or Inf."""


class DivergenceError(PVCMCError, RuntimeError):
    """Training objective became non-finite."""

    def __init__(self, epoch: int, phase: str, detail: str = ""):
        self.epoch = epoch
        self.phase = phase
        message = f"Training diverged at epoch {epoch} ({phase})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class ImputationError(PVCMCError, ValueError):
    """Not enough paired samples to impute from."""


class LossInputError(PVCMCError, ValueError):
    """A loss term received inputs outside its domain (zero-norm vector, nonzero diag(Z), ...)."""


__all__ = [
    "PVCMCError",
    "ConfigError",
    "DatasetError",
    "ShapeError",
    "NumericalError",
    "DivergenceError",
    "ImputationError",
    "LossInputError",
]
