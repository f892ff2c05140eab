"""
Missing-data experiment protocol: paired-fraction sweeps and report emission.
"""

from src.experiment.report import emit_report, render_markdown, write_report_bundle
from src.experiment.runner import (
    CellResult,
    ExperimentReport,
    FractionSummary,
    run_cell,
    run_experiment,
    run_lambda_grid,
)

__all__ = [
    "CellResult",
    "FractionSummary",
    "ExperimentReport",
    "run_cell",
    "run_experiment",
    "run_lambda_grid",
    "emit_report",
    "render_markdown",
    "write_report_bundle",
]
