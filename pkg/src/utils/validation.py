"""
Pre-flight validation for experiment configs.

Catches problems that would otherwise surface minutes into a sweep (a missing
manifest, too few paired samples for KNN imputation, more clusters than
samples) before any training starts.
"""

from pathlib import Path
from typing import Tuple

from config.experiment_config import ExperimentConfig
from src.data.masks import paired_count
from src.utils.logger import logger


def validate_experiment_config(config: ExperimentConfig) -> Tuple[bool, str]:
    """
    Checks an ExperimentConfig against what the pipeline needs to run.

    Returns:
        Tuple of (is_valid: bool, error_message: str)
        - Success: (True, "")
        - Failure: (False, "Human readable error message")
    """
    errors = []
    source = config.dataset

    if source.manifest is not None:
        manifest = Path(source.manifest)
        if not manifest.exists():
            errors.append(
                f"❌ Error: dataset manifest not found: {manifest}\n"
                "   Point 'dataset.manifest' at a JSON manifest listing the view CSV files."
            )
        n_samples = None
    else:
        n_samples = source.synthetic.n
        if len(source.synthetic.dims) < 2:
            errors.append("❌ Error: synthetic datasets need at least two views ('dims' with 2+ entries).")

    clusters = config.n_clusters
    if clusters is None and source.synthetic is not None:
        clusters = source.synthetic.n_clusters
    if n_samples is not None and clusters is not None and clusters > n_samples:
        errors.append(f"❌ Error: n_clusters={clusters} exceeds the {n_samples} available samples.")

    if n_samples is not None:
        knn_k = config.train.knn_k
        for fraction in config.paired_fractions:
            paired = paired_count(n_samples, fraction)
            if paired < n_samples and paired < knn_k:
                errors.append(
                    f"❌ Error: paired fraction {fraction} leaves {paired} paired samples, "
                    f"fewer than knn_k={knn_k} needed for imputation."
                )

    if errors:
        logger.error("Experiment config validation failed")
        return (False, "\n".join(errors))
    logger.info("Experiment config validation successful")
    return (True, "")


__all__ = ["validate_experiment_config"]
