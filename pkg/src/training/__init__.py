"""
Two-step training: joint pretraining, KNN imputation, view-weighted dual optimization.
"""

from src.training.persistence import load_result_arrays, save_result, write_run_log
from src.training.trainer import (
    EpochRecord,
    TrainConfig,
    TrainResult,
    TrainState,
    ViewWeights,
    fused_representation,
    head_assignments,
    impute_missing,
    init_state,
    per_view_loss,
    per_view_losses,
    step_one,
    step_three,
    train,
    update_view_weights,
)

__all__ = [
    "TrainConfig",
    "ViewWeights",
    "EpochRecord",
    "TrainState",
    "TrainResult",
    "init_state",
    "step_one",
    "per_view_loss",
    "per_view_losses",
    "update_view_weights",
    "impute_missing",
    "fused_representation",
    "step_three",
    "train",
    "head_assignments",
    "save_result",
    "load_result_arrays",
    "write_run_log",
]
