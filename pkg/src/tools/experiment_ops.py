"""
Experiment operations exposed as MCP tools.

Every tool returns a human-readable status string ("✅ ..." on success,
"❌ Error: ..." on failure) and never raises, so the MCP client always gets
an answer it can show.
"""

from dataclasses import replace
from pathlib import Path
from typing import Optional

from config.experiment_config import (
    ExperimentConfig,
    SyntheticSource,
    apply_overrides,
    load_experiment_config,
)
from config.settings import load_settings
from src.data.dataset import load_labels, save_dataset
from src.experiment.report import render_markdown, write_report_bundle
from src.experiment.runner import run_experiment, run_pipeline
from src.metrics.scores import acc, nmi
from src.training.persistence import save_result
from src.utils.errors import PVCMCError
from src.utils.logger import logger
from src.utils.validation import validate_experiment_config


def _load_config(config_path: str) -> ExperimentConfig:
    return load_experiment_config(config_path) if config_path else ExperimentConfig()


def _out_dir(out_dir: str, name: str) -> Path:
    return Path(out_dir) if out_dir else load_settings().out_dir / name


def run_experiment_tool(
    config_path: str = "",
    out_dir: str = "",
    paired_fraction: Optional[float] = None,
    repeats: Optional[int] = None,
    seed: Optional[int] = None,
    jobs: int = 1,
) -> str:
    """
    Run the paired-fraction sweep and write report.csv, report.md and metadata.json.

    Args:
        config_path: JSON experiment config; empty runs the synthetic default.
        out_dir: Output directory; defaults to PVCMC_OUT_DIR/experiment.
        paired_fraction: Run a single paired fraction instead of the configured list.
        repeats: Override the number of repeats per fraction.
        seed: Override the base seed.
        jobs: Number of cells to run in parallel.

    Returns:
        The markdown report, or error details.
    """
    try:
        logger.info(f"Received request for tool: run_experiment_tool. Config: {config_path or 'default'}")
        config = apply_overrides(
            _load_config(config_path),
            {"paired_fraction": paired_fraction, "repeats": repeats, "seed": seed},
        )
        is_valid, message = validate_experiment_config(config)
        if not is_valid:
            return message
        report = run_experiment(config, jobs=max(1, jobs))
        paths = write_report_bundle(report, _out_dir(out_dir, "experiment"))
        logger.success("run_experiment_tool completed")
        status = "✅ Experiment complete" if report.complete else "⚠️ Experiment finished with failed cells"
        return f"{status}. Report: {paths['markdown']}\n\n{render_markdown(report)}"
    except PVCMCError as e:
        logger.exception("run_experiment_tool failed")
        return f"❌ Error: {e}"
    except Exception as e:
        logger.exception("run_experiment_tool failed with unexpected error")
        return f"❌ Error running experiment: {str(e)}"


def train_tool(
    config_path: str = "",
    out_dir: str = "",
    paired_fraction: float = 1.0,
    seed: int = 0,
) -> str:
    """
    Train once, cluster the learned affinity and save Z, view weights and history.

    Args:
        config_path: JSON experiment config; empty uses the synthetic default.
        out_dir: Output directory; defaults to PVCMC_OUT_DIR/train.
        paired_fraction: Fraction of fully observed samples.
        seed: Mask and network seed.

    Returns:
        Summary with ACC/NMI when labels exist, or error details.
    """
    try:
        logger.info(f"Received request for tool: train_tool. fraction={paired_fraction}, seed={seed}")
        config = _load_config(config_path)
        dataset = config.dataset.load(config.normalize)
        n_clusters = config.resolve_clusters(dataset)
        output = run_pipeline(config, dataset, n_clusters, paired_fraction, seed)
        directory = save_result(output.result, _out_dir(out_dir, "train"))
        lines = [
            f"✅ Training complete. Saved to {directory}",
            f"View weights: {[round(w, 4) for w in output.result.weights.tolist()]}",
            f"Epochs logged: {len(output.result.loss_history)}",
        ]
        if dataset.labels is not None:
            lines.append(
                f"ACC={acc(dataset.labels, output.clusters.labels):.4f} "
                f"NMI={nmi(dataset.labels, output.clusters.labels):.4f}"
            )
        logger.success("train_tool completed")
        return "\n".join(lines)
    except PVCMCError as e:
        logger.exception("train_tool failed")
        return f"❌ Error: {e}"
    except Exception as e:
        logger.exception("train_tool failed with unexpected error")
        return f"❌ Error during training: {str(e)}"


def evaluate_labels_tool(true_labels_path: str, predicted_labels_path: str) -> str:
    """
    Score a predicted labeling against ground truth with ACC and NMI.

    Args:
        true_labels_path: File with one integer label per line.
        predicted_labels_path: File with one integer cluster id per line.
    """
    try:
        logger.info("Received request for tool: evaluate_labels_tool")
        y = load_labels(true_labels_path)
        l = load_labels(predicted_labels_path)
        return f"✅ ACC={acc(y, l):.4f} NMI={nmi(y, l):.4f} (n={y.size})"
    except PVCMCError as e:
        logger.exception("evaluate_labels_tool failed")
        return f"❌ Error: {e}"
    except Exception as e:
        logger.exception("evaluate_labels_tool failed with unexpected error")
        return f"❌ Error evaluating labels: {str(e)}"


def synthesize_tool(
    out_dir: str,
    n_clusters: int = 3,
    n: int = 150,
    dims: str = "10,10",
    separation: float = 10.0,
    seed: int = 0,
    noise_view: Optional[int] = None,
) -> str:
    """
    Write a seeded Gaussian-mixture multi-view dataset (views, labels, manifest).

    Args:
        out_dir: Directory for view CSVs, labels.csv and manifest.json.
        dims: Comma-separated view dimensions, e.g. "10,10".
        noise_view: Optional view index to replace with pure noise.
    """
    try:
        logger.info(f"Received request for tool: synthesize_tool. Target directory: {out_dir}")
        source = SyntheticSource(
            n_clusters=n_clusters,
            n=n,
            dims=tuple(int(d) for d in dims.split(",") if d.strip()),
            separation=separation,
            seed=seed,
            noise_view=noise_view,
        )
        manifest = save_dataset(source.generate(), out_dir)
        logger.success("synthesize_tool completed")
        return f"✅ Synthetic dataset written. Manifest: {manifest}"
    except PVCMCError as e:
        logger.exception("synthesize_tool failed")
        return f"❌ Error: {e}"
    except Exception as e:
        logger.exception("synthesize_tool failed with unexpected error")
        return f"❌ Error writing dataset: {str(e)}"


__all__ = ["run_experiment_tool", "train_tool", "evaluate_labels_tool", "synthesize_tool"]
