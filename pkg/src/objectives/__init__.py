"""
Loss terms and the combined training objective.
"""

from src.objectives.losses import (
    EPSILON,
    Hyperparameters,
    LossBreakdown,
    LossTerms,
    contrastive_loss,
    entropy_regularization,
    feature_alignment_loss,
    gather_observed,
    probability_alignment_loss,
    reconstruction_loss,
    self_expression_loss,
    total_loss,
    view_reconstruction_loss,
)
from src.objectives.objective import ForwardPass, TrainingInputs, forward, fusion_coefficients, objective

__all__ = [
    "EPSILON",
    "Hyperparameters",
    "LossBreakdown",
    "LossTerms",
    "contrastive_loss",
    "self_expression_loss",
    "reconstruction_loss",
    "view_reconstruction_loss",
    "feature_alignment_loss",
    "probability_alignment_loss",
    "entropy_regularization",
    "gather_observed",
    "total_loss",
    "TrainingInputs",
    "ForwardPass",
    "forward",
    "fusion_coefficients",
    "objective",
]
