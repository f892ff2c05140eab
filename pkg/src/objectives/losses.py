"""
Differentiable loss terms.

Conventions used throughout:
- rows are samples, so self-expression reads H ~ Z H with diag(Z) = 0
- ||Z||_{1,2} is the sum of column l2 norms of Z
- every log is taken of max(x, epsilon), epsilon = 1e-12 by default
- `observed` is an n x V boolean matrix (or a PairingMask) selecting the rows
  each view contributes
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np

from src.data.dataset import ViewMatrix
from src.data.masks import PairingMask
from src.nn.autodiff import Tensor, concat_rows
from src.utils.errors import ConfigError, LossInputError, ShapeError

EPSILON = 1e-12
MaskLike = Union[PairingMask, np.ndarray]


@dataclass(frozen=True)
class Hyperparameters:
    """Trade-off weights, temperature, view-weight sharpness and model sizes."""

    lambda1: float = 0.001
    lambda2: float = 0.001
    lambda3: float = 0.001
    tau: float = 0.5
    alpha: float = 0.1
    latent_dim: Optional[int] = None
    n_clusters: int = 2
    epsilon: float = EPSILON

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.tau <= 0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.n_clusters < 2:
            raise ConfigError(f"n_clusters must be >= 2, got {self.n_clusters}")
        if self.latent_dim is not None and self.latent_dim < 1:
            raise ConfigError(f"latent_dim must be >= 1, got {self.latent_dim}")

    @property
    def k(self) -> int:
        """Latent dimension; defaults to the cluster count."""
        return self.latent_dim if self.latent_dim is not None else self.n_clusters


class LossTerms(NamedTuple):
    re: Tensor
    se: Tensor
    mcl: Tensor
    F: Tensor
    C: Tensor
    R: Tensor


@dataclass
class LossBreakdown:
    re: float
    se: float
    mcl: float
    F: float
    C: float
    R: float
    total: float
    objective: Optional[Tensor] = field(default=None, repr=False, compare=False)

    FIELDS = ("re", "se", "mcl", "F", "C", "R", "total")

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}


def _observed_matrix(mask: MaskLike) -> np.ndarray:
    return mask.observed if isinstance(mask, PairingMask) else np.asarray(mask, dtype=bool)


def _normalize_rows(x: Tensor, what: str) -> Tensor:
    norms = (x * x).sum(axis=1, keepdims=True).sqrt()
    zero = np.flatnonzero(norms.data.ravel() == 0)
    if zero.size:
        raise LossInputError(f"Zero-norm {what} vector at index {int(zero[0])}; cosine similarity is undefined")
    return x / norms


def _check_distributions(Q: Tensor, view: int) -> None:
    sums = Q.data.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-6)
    if bad.size or (Q.data < 0).any():
        row = int(bad[0]) if bad.size else int(np.argwhere(Q.data < 0)[0][0])
        raise LossInputError(f"Row {row} of view {view} probabilities is not a distribution")


def gather_observed(latents: Sequence[Tensor], mask: MaskLike):
    """
    Stack the observed rows of every view into one contrastive space.

    Returns (Q, sample_ids, view_ids): Q is m x k, row r belongs to sample
    sample_ids[r] seen through view view_ids[r].
    """
    observed = _observed_matrix(mask)
    blocks, sample_ids, view_ids = [], [], []
    for v, H in enumerate(latents):
        rows = np.flatnonzero(observed[:, v])
        if rows.size:
            blocks.append(H.take_rows(rows))
            sample_ids.append(rows)
            view_ids.append(np.full(rows.size, v))
    if not blocks:
        raise LossInputError("No observed rows to build a contrastive space from")
    return concat_rows(blocks), np.concatenate(sample_ids), np.concatenate(view_ids)


def contrastive_loss(Q: Tensor, sample_ids: Sequence[int], tau: float = 0.5) -> Tensor:
    """
    Multi-view contrastive loss under cosine similarity and temperature tau.

    Positives of an anchor are the other rows carrying the same sample id; the
    denominator runs over every row except the anchor itself. The result is
    the negated mean over anchors of the per-anchor averaged log-ratio, so
    minimizing it pulls positive pairs together. Rows with no positive still
    act as negatives but are not anchors.

    Raises:
        LossInputError: a representation has zero norm.
    """
    if tau <= 0:
        raise ConfigError(f"tau must be > 0, got {tau}")
    sample_ids = np.asarray(sample_ids)
    m = Q.shape[0]
    if sample_ids.shape != (m,):
        raise ShapeError(f"sample_ids must have length {m}, got {sample_ids.shape}")

    same = sample_ids[:, None] == sample_ids[None, :]
    np.fill_diagonal(same, False)
    positives_per_anchor = same.sum(axis=1)
    anchors = positives_per_anchor > 0
    if not anchors.any():
        return Tensor(0.0)

    weights = np.zeros((m, m))
    weights[anchors] = same[anchors] / positives_per_anchor[anchors, None]
    off_diagonal = 1.0 - np.eye(m)

    Qn = _normalize_rows(Q, "representation")
    logits = (Qn @ Qn.T) * (1.0 / tau)
    log_denominator = ((logits.exp() * off_diagonal).sum(axis=1, keepdims=True)).log()
    log_ratio = logits - log_denominator
    return -(log_ratio * weights).sum() * (1.0 / int(anchors.sum()))


def self_expression_loss(H: Tensor, Z: Tensor, lambda1: float) -> Tensor:
    """
    ||H - Z H||_F^2 + lambda1 * ||Z||_{1,2}.

    Raises:
        LossInputError: diag(Z) is not exactly zero.
    """
    n = H.shape[0]
    if Z.shape != (n, n):
        raise ShapeError(f"Z must be {n} x {n}, got {Z.shape}")
    diagonal = np.diag(Z.data)
    if np.any(diagonal != 0):
        raise LossInputError(f"diag(Z) must be zero; entry {int(np.flatnonzero(diagonal)[0])} is not")
    residual = H - Z @ H
    frobenius = (residual * residual).sum()
    column_norms = (Z * Z).sum(axis=0).sqrt()
    return frobenius + column_norms.sum() * lambda1


def view_reconstruction_loss(X_v: Union[ViewMatrix, np.ndarray], X_hat_v: Tensor, observed_v: np.ndarray) -> Tensor:
    """Squared error of one view over its observed rows."""
    target = X_v.values if isinstance(X_v, ViewMatrix) else np.asarray(X_v, dtype=np.float64)
    if target.shape != X_hat_v.shape:
        raise ShapeError(f"Reconstruction shape {X_hat_v.shape} does not match view shape {target.shape}")
    row_weight = np.asarray(observed_v, dtype=np.float64)[:, None]
    diff = X_hat_v - target
    return (diff * diff * row_weight).sum()


def reconstruction_loss(
    X: Sequence[Union[ViewMatrix, np.ndarray]],
    X_hat: Sequence[Tensor],
    mask: MaskLike,
) -> Tensor:
    """Sum over views and observed rows of ||X_i - X_hat_i||^2; missing rows contribute nothing."""
    observed = _observed_matrix(mask)
    if len(X) != len(X_hat) or observed.shape[1] != len(X):
        raise ShapeError(f"{len(X)} views, {len(X_hat)} reconstructions, mask with {observed.shape[1]} views")
    total = Tensor(0.0)
    for v, (target, reconstruction) in enumerate(zip(X, X_hat)):
        total = total + view_reconstruction_loss(target, reconstruction, observed[:, v])
    return total


def has_alignable_pair(mask: MaskLike) -> bool:
    observed = _observed_matrix(mask)
    V = observed.shape[1]
    return any((observed[:, p] & observed[:, q]).sum() >= 2 for p, q in combinations(range(V), 2))


def feature_alignment_loss(features: Sequence[Tensor], mask: MaskLike) -> Tensor:
    """
    Semantic feature alignment over every ordered view pair (p, q), p != q.

    With n_t co-observed samples and l2-normalized features f:
        -(1/n_t) sum_i f(x_i^p).f(x_i^q) + (1/(2 n_t)) sum_{i != j} f(x_i^p).f(x_j^q)
    Pairs with fewer than two co-observed samples are skipped.

    Raises:
        LossInputError: no view pair has two co-observed samples.
    """
    observed = _observed_matrix(mask)
    total = Tensor(0.0)
    used = 0
    for p, q in permutations(range(len(features)), 2):
        rows = np.flatnonzero(observed[:, p] & observed[:, q])
        n_t = rows.size
        if n_t < 2:
            continue
        Fp = _normalize_rows(features[p].take_rows(rows), "feature")
        Fq = _normalize_rows(features[q].take_rows(rows), "feature")
        same_sample = (Fp * Fq).sum()
        all_pairs = (Fp @ Fq.T).sum()
        total = total - same_sample * (1.0 / n_t) + (all_pairs - same_sample) * (1.0 / (2.0 * n_t))
        used += 1
    if used == 0:
        raise LossInputError("Feature alignment needs a view pair with at least two co-observed samples")
    return total


def probability_alignment_loss(Q_per_view: Sequence[Tensor], mask: MaskLike, epsilon: float = EPSILON) -> Tensor:
    """
    Symmetric KL between the cluster distributions of co-observed samples:
        sum_{p<q} sum_i 1/2 [KL(q_i^p || q_i^q) + KL(q_i^q || q_i^p)]

    Raises:
        LossInputError: a row is not a probability distribution.
    """
    observed = _observed_matrix(mask)
    for v, Q in enumerate(Q_per_view):
        _check_distributions(Q, v)
    total = Tensor(0.0)
    for p, q in combinations(range(len(Q_per_view)), 2):
        rows = np.flatnonzero(observed[:, p] & observed[:, q])
        if rows.size == 0:
            continue
        A = Q_per_view[p].take_rows(rows)
        B = Q_per_view[q].take_rows(rows)
        log_ratio = A.clip_min(epsilon).log() - B.clip_min(epsilon).log()
        # KL(A||B) + KL(B||A) = sum (A - B) * (log A - log B)
        total = total + ((A - B) * log_ratio).sum() * 0.5
    return total


def entropy_regularization(
    Q_per_view: Sequence[Tensor],
    mask: Optional[MaskLike] = None,
    epsilon: float = EPSILON,
) -> Tensor:
    """
    sum_v sum_j Qhat_j^v log Qhat_j^v with Qhat^v the mean assignment of view v.

    Each view contributes a value in [-log K, 0]; minimizing spreads samples
    across clusters.
    """
    observed = _observed_matrix(mask) if mask is not None else None
    total = Tensor(0.0)
    for v, Q in enumerate(Q_per_view):
        _check_distributions(Q, v)
        rows = np.flatnonzero(observed[:, v]) if observed is not None else np.arange(Q.shape[0])
        if rows.size == 0:
            continue
        mean_assignment = Q.take_rows(rows).mean(axis=0)
        total = total + (mean_assignment * mean_assignment.clip_min(epsilon).log()).sum()
    return total


def total_loss(terms: LossTerms, hp: Hyperparameters, include_probability_alignment: bool = False) -> LossBreakdown:
    """
    total = re + lambda1*se + lambda2*mcl + lambda3*(F + R [+ C]).

    C joins the lambda3 group only when `include_probability_alignment` is set;
    it is always reported.
    """
    clustering = terms.F + terms.R
    if include_probability_alignment:
        clustering = clustering + terms.C
    objective = terms.re + terms.se * hp.lambda1 + terms.mcl * hp.lambda2 + clustering * hp.lambda3
    return LossBreakdown(
        re=terms.re.item(),
        se=terms.se.item(),
        mcl=terms.mcl.item(),
        F=terms.F.item(),
        C=terms.C.item(),
        R=terms.R.item(),
        total=objective.item(),
        objective=objective,
    )
