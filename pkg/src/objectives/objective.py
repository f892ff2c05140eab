"""
Assembly of the combined objective from the current networks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.data.dataset import MultiViewDataset
from src.data.masks import PairingMask
from src.nn.autodiff import Tensor
from src.nn.networks import ParameterSet, cluster_probabilities, decode, encode
from src.objectives.losses import (
    Hyperparameters,
    LossBreakdown,
    LossTerms,
    contrastive_loss,
    entropy_regularization,
    feature_alignment_loss,
    gather_observed,
    has_alignable_pair,
    probability_alignment_loss,
    reconstruction_loss,
    self_expression_loss,
    total_loss,
)
from src.utils.errors import ShapeError


@dataclass
class TrainingInputs:
    """
    What the networks see and what they are scored against.

    `features[v]` feeds encoder v (unobserved rows zeroed before imputation,
    filled after). `feature_mask` selects rows that take part in the
    contrastive, alignment, entropy and fusion terms; `recon_mask` selects the
    rows scored by reconstruction.
    """

    features: List[np.ndarray]
    targets: List[np.ndarray]
    feature_mask: np.ndarray
    recon_mask: np.ndarray

    def __post_init__(self):
        n_views = len(self.features)
        if len(self.targets) != n_views:
            raise ShapeError(f"{n_views} feature views but {len(self.targets)} targets")
        for name in ("feature_mask", "recon_mask"):
            mask = getattr(self, name)
            if mask.shape != (self.n_samples, n_views):
                raise ShapeError(f"{name} must be {self.n_samples} x {n_views}, got {mask.shape}")

    @property
    def n_samples(self) -> int:
        return self.features[0].shape[0]

    @property
    def n_views(self) -> int:
        return len(self.features)

    @classmethod
    def from_dataset(cls, dataset: MultiViewDataset, mask: PairingMask) -> "TrainingInputs":
        """Pre-imputation inputs: only observed rows are visible anywhere."""
        observed = mask.observed
        features = dataset.observed_views(observed)
        return cls(features=features, targets=features, feature_mask=observed.copy(), recon_mask=observed.copy())

    @classmethod
    def after_imputation(
        cls,
        completed: Sequence[np.ndarray],
        mask: PairingMask,
        trust_imputed: bool = False,
    ) -> "TrainingInputs":
        """
        Post-imputation inputs: every row is encoded and takes part in the
        representation terms; imputed rows are reconstruction targets only
        when `trust_imputed` is set.
        """
        completed = [np.asarray(X, dtype=np.float64) for X in completed]
        everything = np.ones_like(mask.observed)
        return cls(
            features=completed,
            targets=completed,
            feature_mask=everything,
            recon_mask=everything if trust_imputed else mask.observed.copy(),
        )


@dataclass
class ForwardPass:
    latents: List[Tensor]
    reconstructions: List[Tensor]
    probabilities: List[Tensor]
    fused: Tensor


def fusion_coefficients(feature_mask: np.ndarray, weights: Sequence[float]) -> np.ndarray:
    """
    Per-sample fusion coefficients: w_v renormalized over the views a sample has.

    Rows sum to one; a sample seen in every view gets exactly `weights`. A
    sample whose views all carry zero weight (softmax underflow) falls back to
    a plain mean over its views.
    """
    present = feature_mask.astype(np.float64)
    weighted = present * np.asarray(weights, dtype=np.float64)[None, :]
    totals = weighted.sum(axis=1, keepdims=True)
    underflow = totals[:, 0] == 0
    if underflow.any():
        weighted[underflow] = present[underflow]
        totals[underflow] = present[underflow].sum(axis=1, keepdims=True)
    return weighted / totals


def forward(params: ParameterSet, inputs: TrainingInputs, weights: Sequence[float]) -> ForwardPass:
    if params.n_views != inputs.n_views:
        raise ShapeError(f"Parameter set has {params.n_views} views, inputs have {inputs.n_views}")
    latents = [encode(params.encoders[v], X) for v, X in enumerate(inputs.features)]
    reconstructions = [decode(params.decoders[v], H) for v, H in enumerate(latents)]
    probabilities = [cluster_probabilities(params.head, H) for H in latents]
    coefficients = fusion_coefficients(inputs.feature_mask, weights)
    fused = latents[0] * coefficients[:, [0]]
    for v in range(1, len(latents)):
        fused = fused + latents[v] * coefficients[:, [v]]
    return ForwardPass(latents, reconstructions, probabilities, fused)


def objective(
    params: ParameterSet,
    inputs: TrainingInputs,
    Z: Tensor,
    hp: Hyperparameters,
    weights: Sequence[float],
    include_probability_alignment: bool = False,
    state: Optional[ForwardPass] = None,
) -> LossBreakdown:
    """
    Every loss term from one forward pass, combined into the total objective.

    Terms that need two views (contrastive, feature and probability alignment)
    are zero when the inputs have a single view or no view pair shares two
    samples.
    """
    state = state or forward(params, inputs, weights)
    mask = inputs.feature_mask
    zero = Tensor(0.0)

    re = reconstruction_loss(inputs.targets, state.reconstructions, inputs.recon_mask)
    se = self_expression_loss(state.fused, Z, hp.lambda1)
    if inputs.n_views >= 2:
        Q, sample_ids, _ = gather_observed(state.latents, mask)
        mcl = contrastive_loss(Q, sample_ids, hp.tau)
        F = feature_alignment_loss(state.latents, mask) if has_alignable_pair(mask) else zero
        C = probability_alignment_loss(state.probabilities, mask, hp.epsilon)
    else:
        mcl = F = C = zero
    R = entropy_regularization(state.probabilities, mask, hp.epsilon)
    return total_loss(LossTerms(re, se, mcl, F, C, R), hp, include_probability_alignment)


__all__ = ["TrainingInputs", "ForwardPass", "fusion_coefficients", "forward", "objective"]
