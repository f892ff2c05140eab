"""
Report emission: summary CSV, per-run CSV, markdown table, metadata and timings.

report.csv, runs.csv, report.md and metadata.json depend only on the config
and seeds; wall times go to timings.json.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Union

import pandas as pd

from config.report_template import CELL_FORMAT, FAILED_FORMAT, get_report_template
from src.experiment.runner import ExperimentReport, FractionSummary
from src.utils.errors import ConfigError
from src.utils.logger import logger

FORMATS = ("csv", "markdown")
FLOAT_FORMAT = "%.17g"

REPORT_CSV = "report.csv"
RUNS_CSV = "runs.csv"
REPORT_MD = "report.md"
METADATA_JSON = "metadata.json"
TIMINGS_JSON = "timings.json"


def summary_frame(report: ExperimentReport) -> pd.DataFrame:
    records = []
    for summary in report.summaries:
        records.append({
            "fraction": summary.fraction,
            "acc_mean": summary.mean("acc"),
            "acc_std": summary.std("acc"),
            "nmi_mean": summary.mean("nmi"),
            "nmi_std": summary.std("nmi"),
            "runs": len(summary.runs),
            "status": "ok" if summary.complete else "failed",
            "error": summary.failure or "",
        })
    return pd.DataFrame.from_records(records)


def runs_frame(report: ExperimentReport) -> pd.DataFrame:
    records = []
    for run in report.runs():
        record = {
            "fraction": run.fraction,
            "repeat": run.repeat,
            "seed": run.seed,
            "acc": run.acc,
            "nmi": run.nmi,
        }
        record.update({f"weight_{v}": w for v, w in enumerate(run.weights)})
        record["error"] = run.error or ""
        records.append(record)
    return pd.DataFrame.from_records(records)


def format_cell(summary: FractionSummary, metric: str) -> str:
    if not summary.complete:
        reason = (summary.failure or "unknown").replace("|", "/").replace("\n", " ")
        return FAILED_FORMAT.format(reason=reason)
    return CELL_FORMAT.format(mean=summary.mean(metric), std=summary.std(metric))


def _markdown_table(header: List[str], rows: List[List[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines)


def render_markdown(report: ExperimentReport) -> str:
    """Metrics as rows, paired fractions as columns, mean±std cells at four decimals."""
    header = ["Metric"] + [f"{summary.fraction:g}" for summary in report.summaries]
    results = _markdown_table(
        header,
        [
            ["ACC"] + [format_cell(s, "acc") for s in report.summaries],
            ["NMI"] + [format_cell(s, "nmi") for s in report.summaries],
        ],
    )
    n_views = max((len(run.weights) for run in report.runs()), default=0)
    weight_rows = []
    for v in range(n_views):
        row = [f"w{v}"]
        for summary in report.summaries:
            weights = summary.mean_weights()
            row.append(f"{weights[v]:.4f}" if weights is not None else "-")
        weight_rows.append(row)
    weights_table = _markdown_table(["View"] + header[1:], weight_rows) if weight_rows else "-"

    config = report.metadata["config"]
    train = config["train"]
    hyperparameters = ", ".join(f"{k}={train[k]}" for k in ("lambda1", "lambda2", "lambda3", "tau", "alpha"))
    decisions = "\n".join(f"- {k}: {v}" for k, v in sorted(report.metadata["decisions"].items()))
    return get_report_template().format(
        DATASET=json.dumps(config["dataset"], sort_keys=True),
        N_CLUSTERS=report.n_clusters,
        REPEATS=config["repeats"],
        BASE_SEED=config["base_seed"],
        HYPERPARAMETERS=hyperparameters,
        RESULTS_TABLE=results,
        WEIGHTS_TABLE=weights_table,
        DECISIONS=decisions,
    )


def emit_report(report: ExperimentReport, out_dir: Union[str, Path], fmt: str = "csv") -> Path:
    """
    Write one report file: "csv" -> report.csv (17 significant digits),
    "markdown" -> report.md.

    Raises:
        ConfigError: unknown format.
        OSError: the directory is not writable.
    """
    if fmt not in FORMATS:
        raise ConfigError(f"Unknown report format {fmt!r}; expected one of {FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out_dir / REPORT_CSV
        summary_frame(report).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    else:
        path = out_dir / REPORT_MD
        path.write_text(render_markdown(report), encoding="utf-8")
    return path


def write_report_bundle(report: ExperimentReport, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Every report artifact under `out_dir`."""
    out_dir = Path(out_dir)
    paths = {fmt: emit_report(report, out_dir, fmt) for fmt in FORMATS}
    paths["runs"] = out_dir / RUNS_CSV
    runs_frame(report).to_csv(paths["runs"], index=False, float_format=FLOAT_FORMAT)
    paths["metadata"] = out_dir / METADATA_JSON
    paths["metadata"].write_text(json.dumps(report.metadata, indent=2, sort_keys=True), encoding="utf-8")
    paths["timings"] = out_dir / TIMINGS_JSON
    timings = [
        {"fraction": run.fraction, "repeat": run.repeat, "wall_time": run.wall_time} for run in report.runs()
    ]
    paths["timings"].write_text(json.dumps(timings, indent=2), encoding="utf-8")
    logger.info(f"Report written to {out_dir}")
    return paths


__all__ = [
    "FORMATS",
    "summary_frame",
    "runs_frame",
    "format_cell",
    "render_markdown",
    "emit_report",
    "write_report_bundle",
]
