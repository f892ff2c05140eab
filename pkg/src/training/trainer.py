"""
Two-step training with dynamic view weights.

Step 1 pretrains encoders, decoders, the cluster head and Z on the combined
objective over observed rows. Missing views are then imputed by latent KNN.
Step 3 alternates one epoch of the combined objective with one epoch of the
view-weighted reconstruction loss, recomputing the softmax view weights before
every outer iteration.

Network parameters use Adam. Z starts at zero and takes projected gradient
steps of size 1/L, L = 2 * lambda1 * sigma_max(H)^2, with diag(Z) reset to
zero after every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.data.dataset import MultiViewDataset
from src.data.masks import PairingMask
from src.impute.knn import ImputationResult, knn_impute
from src.nn.autodiff import Tensor, backward
from src.nn.networks import ParameterSet, build_parameter_set, cluster_probabilities, decode, encode
from src.nn.optim import AdamState, adam_step
from src.objectives.losses import Hyperparameters, LossBreakdown, view_reconstruction_loss
from src.objectives.objective import TrainingInputs, forward, objective
from src.utils.errors import ConfigError, DivergenceError, NumericalError, ShapeError
from src.utils.logger import logger

STEP_ONE = "step1"
STEP_THREE_JOINT = "step3-joint"
STEP_THREE_WEIGHTED = "step3-weighted"

DECISIONS = {
    "encoder": "MLP encoders in place of a vision transformer",
    "self_expression": "H ~ Z H, rows are samples, diag(Z) = 0",
    "l12_norm": "sum of column l2 norms of Z",
    "contrastive_sign": "negated mean log-ratio, denominator excludes the anchor",
    "feature_alignment": "ordered view pairs over co-observed samples, l2-normalized features (reconstructed reading)",
    "probability_alignment": "symmetric KL with epsilon clamping",
    "view_loss": "per-view reconstruction over scored rows",
    "fusion": "weighted mean of view latents renormalized over observed views",
    "z_update": "projected gradient descent from zero, step 1/L",
    "imputation": "latent-space KNN among paired samples, run after step 1",
    "imputed_rows_in_contrastive": True,
    "step3_schedule": "1 joint epoch : 1 weighted epoch",
}


@dataclass(frozen=True)
class TrainConfig:
    hp: Hyperparameters = field(default_factory=Hyperparameters)
    epochs_step1: int = 500
    epochs_step3: int = 200
    learning_rate: float = 1e-4
    seed: int = 0
    trust_imputed: bool = False
    enable_probability_alignment: bool = False
    tolerance: float = 1e-6
    knn_k: int = 5
    distance_weighted: bool = False
    reimpute_each_epoch: bool = False
    hidden_width: Optional[int] = None
    hidden_layers: int = 2

    def __post_init__(self):
        if self.epochs_step1 < 1 or self.epochs_step3 < 1:
            raise ConfigError(
                f"Epoch budgets must be >= 1, got step1={self.epochs_step1}, step3={self.epochs_step3}"
            )
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.tolerance < 0:
            raise ConfigError(f"tolerance must be >= 0, got {self.tolerance}")
        if self.knn_k < 1:
            raise ConfigError(f"knn_k must be >= 1, got {self.knn_k}")
        if self.hidden_layers < 0:
            raise ConfigError(f"hidden_layers must be >= 0, got {self.hidden_layers}")
        if self.hidden_width is not None and self.hidden_width < 1:
            raise ConfigError(f"hidden_width must be >= 1, got {self.hidden_width}")


@dataclass(frozen=True, eq=False)
class ViewWeights:
    """Softmax view weights; entries are strictly positive and sum to one."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64, copy=True).ravel()
        if w.size < 1 or not np.isfinite(w).all() or (w <= 0).any():
            raise ConfigError(f"View weights must be finite and positive, got {w}")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError(f"View weights must sum to 1, got {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, n_views: int) -> "ViewWeights":
        return cls(np.full(n_views, 1.0 / n_views))

    def __len__(self) -> int:
        return self.w.size

    def tolist(self) -> List[float]:
        return [float(x) for x in self.w]


@dataclass
class EpochRecord:
    """
    One logged epoch. Joint epochs carry the full loss breakdown; weighted
    epochs carry the weighted reconstruction value.
    """

    epoch: int
    phase: str
    breakdown: Optional[LossBreakdown]
    weighted_loss: Optional[float]
    view_losses: List[float]
    weights: List[float]

    @property
    def total(self) -> float:
        return self.breakdown.total if self.breakdown is not None else float(self.weighted_loss)

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"epoch": self.epoch, "phase": self.phase}
        for name in LossBreakdown.FIELDS:
            row[name] = getattr(self.breakdown, name) if self.breakdown is not None else None
        row["weighted"] = self.weighted_loss
        for v, value in enumerate(self.view_losses):
            row[f"view_loss_{v}"] = value
        for v, value in enumerate(self.weights):
            row[f"weight_{v}"] = value
        return row


@dataclass
class TrainState:
    """Mutable state threaded through the training steps of one run."""

    dataset: MultiViewDataset
    mask: PairingMask
    config: TrainConfig
    params: ParameterSet
    inputs: TrainingInputs
    Z: np.ndarray
    weights: ViewWeights
    adam: AdamState
    adam_weighted: AdamState
    history: List[EpochRecord] = field(default_factory=list)
    imputation: Optional[ImputationResult] = None
    epochs_run: Dict[str, int] = field(default_factory=dict)

    @property
    def n_views(self) -> int:
        return self.dataset.n_views


@dataclass(eq=False)
class TrainResult:
    Z: np.ndarray
    weights: ViewWeights
    params: ParameterSet
    loss_history: List[EpochRecord]
    metadata: Dict[str, Any]
    fused: np.ndarray
    imputation: Optional[ImputationResult] = None


def _check_inputs(dataset: MultiViewDataset, mask: PairingMask) -> None:
    if mask.observed.shape != (dataset.n_samples, dataset.n_views):
        raise ShapeError(
            f"Mask shape {mask.observed.shape} does not match dataset ({dataset.n_samples}, {dataset.n_views})"
        )


def init_state(dataset: MultiViewDataset, mask: PairingMask, config: TrainConfig) -> TrainState:
    _check_inputs(dataset, mask)
    hp = config.hp
    n = dataset.n_samples
    if n < hp.n_clusters:
        raise ConfigError(f"Need at least K={hp.n_clusters} samples, got {n}")
    params = build_parameter_set(
        dataset.dims,
        latent_dim=hp.k,
        n_clusters=hp.n_clusters,
        seed=config.seed,
        hidden_width=config.hidden_width,
        hidden_layers=config.hidden_layers,
    )
    return TrainState(
        dataset=dataset,
        mask=mask,
        config=config,
        params=params,
        inputs=TrainingInputs.from_dataset(dataset, mask),
        Z=np.zeros((n, n)),
        weights=ViewWeights.uniform(dataset.n_views),
        adam=AdamState(learning_rate=config.learning_rate),
        adam_weighted=AdamState(learning_rate=config.learning_rate),
    )


def _z_step(Z: np.ndarray, grad: np.ndarray, H: np.ndarray, lambda1: float) -> np.ndarray:
    """One projected gradient step on Z with step size 1/L."""
    sigma_max = np.linalg.norm(H, ord=2)
    lipschitz = 2.0 * lambda1 * sigma_max * sigma_max
    if lipschitz <= 0:
        return Z
    Z = Z - grad / lipschitz
    np.fill_diagonal(Z, 0.0)
    return Z


def _joint_epoch(state: TrainState, phase: str, epoch: int) -> LossBreakdown:
    """One full-batch step on the combined objective (networks via Adam, Z via projected GD)."""
    hp = state.config.hp
    update_z = hp.lambda1 > 0
    Z = Tensor(state.Z, requires_grad=update_z)
    params = state.params.parameters()
    try:
        forward_pass = forward(state.params, state.inputs, state.weights.w)
        breakdown = objective(
            state.params,
            state.inputs,
            Z,
            hp,
            state.weights.w,
            include_probability_alignment=state.config.enable_probability_alignment,
            state=forward_pass,
        )
        grads = backward(breakdown.objective, params + ([Z] if update_z else []))
    except NumericalError as e:
        raise DivergenceError(epoch, phase, str(e)) from e

    adam_step(params, grads[: len(params)], state.adam)
    if update_z:
        state.Z = _z_step(state.Z, grads[-1], forward_pass.fused.data, hp.lambda1)
    return breakdown


def _view_loss_tensor(state: TrainState, view: int) -> Tensor:
    inputs = state.inputs
    H = encode(state.params.encoders[view], inputs.features[view])
    X_hat = decode(state.params.decoders[view], H)
    return view_reconstruction_loss(inputs.targets[view], X_hat, inputs.recon_mask[:, view])


def per_view_loss(state: TrainState, view: int) -> float:
    """Reconstruction loss of one view over the rows it is scored on."""
    if not 0 <= view < state.n_views:
        raise ConfigError(f"View index {view} out of range for {state.n_views} views")
    return _view_loss_tensor(state, view).item()


def per_view_losses(state: TrainState) -> np.ndarray:
    return np.array([per_view_loss(state, v) for v in range(state.n_views)])


def update_view_weights(losses: Sequence[float], alpha: float) -> ViewWeights:
    """w_v = exp(-alpha L_v) / sum_v' exp(-alpha L_v'), computed with a max shift."""
    if alpha <= 0:
        raise ConfigError(f"alpha must be > 0, got {alpha}")
    losses = np.asarray(losses, dtype=np.float64).ravel()
    if losses.size < 1 or not np.isfinite(losses).all():
        raise ConfigError(f"View losses must be finite, got {losses}")
    scores = -alpha * losses
    scores -= scores.max()
    e = np.exp(scores)
    # exp underflows to 0 for large loss gaps; keep every view strictly positive
    e = np.maximum(e / e.sum(), np.finfo(np.float64).tiny)
    return ViewWeights(e / e.sum())


def _weighted_epoch(state: TrainState, epoch: int) -> float:
    """One Adam step on sum_v w_v L_v over encoder and decoder parameters."""
    params = [p for v in range(state.n_views) for p in state.params.view_parameters(v)]
    try:
        loss = Tensor(0.0)
        for v in range(state.n_views):
            loss = loss + _view_loss_tensor(state, v) * float(state.weights.w[v])
        grads = backward(loss, params)
    except NumericalError as e:
        raise DivergenceError(epoch, STEP_THREE_WEIGHTED, str(e)) from e
    adam_step(params, grads, state.adam_weighted)
    return loss.item()


def _record(state: TrainState, epoch: int, phase: str, breakdown=None, weighted=None, view_losses=None) -> EpochRecord:
    if breakdown is not None and breakdown.objective is not None:
        # history holds plain floats, never a graph root
        breakdown = replace(breakdown, objective=None)
    record = EpochRecord(
        epoch=epoch,
        phase=phase,
        breakdown=breakdown,
        weighted_loss=weighted,
        view_losses=[float(x) for x in (view_losses if view_losses is not None else [])],
        weights=state.weights.tolist(),
    )
    state.history.append(record)
    if breakdown is not None:
        logger.debug(f"{phase} epoch {epoch}: {breakdown.as_dict()}")
    else:
        logger.debug(f"{phase} epoch {epoch}: weighted={weighted}")
    return record


def _converged(previous: Optional[float], current: float, tolerance: float) -> bool:
    return previous is not None and abs(current - previous) < tolerance


def step_one(dataset: MultiViewDataset, mask: PairingMask, config: TrainConfig) -> TrainState:
    """
    Joint pretraining on the combined objective over observed rows.

    Stops after `epochs_step1` epochs or once the total changes by less than
    `tolerance` between consecutive epochs.

    Raises:
        DivergenceError: the objective or a gradient became non-finite.
    """
    state = init_state(dataset, mask, config)
    logger.info(
        f"Step 1: n={dataset.n_samples}, V={dataset.n_views}, p={mask.p}, u={mask.u}, "
        f"latent={config.hp.k}, seed={config.seed}"
    )
    previous = None
    epoch = 0
    for epoch in range(1, config.epochs_step1 + 1):
        breakdown = _joint_epoch(state, STEP_ONE, epoch)
        _record(state, epoch, STEP_ONE, breakdown=breakdown)
        if _converged(previous, breakdown.total, config.tolerance):
            logger.info(f"Step 1 converged at epoch {epoch}")
            break
        previous = breakdown.total
    state.epochs_run[STEP_ONE] = epoch
    return state


def impute_missing(state: TrainState) -> ImputationResult:
    """
    Fill missing views by latent KNN and switch the state to post-imputation
    inputs. Neighbors are searched on encodings of the observed rows only.
    """
    config = state.config
    observed_only = TrainingInputs.from_dataset(state.dataset, state.mask)
    embeddings = [encode(state.params.encoders[v], X).data for v, X in enumerate(observed_only.features)]
    result = knn_impute(
        state.dataset,
        state.mask,
        embeddings,
        k=config.knn_k,
        distance_weighted=config.distance_weighted,
    )
    state.imputation = result
    state.inputs = TrainingInputs.after_imputation(result.values(), state.mask, config.trust_imputed)
    return result


def fused_representation(state: TrainState) -> np.ndarray:
    return forward(state.params, state.inputs, state.weights.w).fused.data


def step_three(state: TrainState, weights: Optional[ViewWeights] = None, config: Optional[TrainConfig] = None) -> TrainResult:
    """
    Dual optimization: per outer iteration, refresh the view weights from the
    per-view losses, take one joint epoch, then one weighted epoch.

    Raises:
        DivergenceError: the objective or a gradient became non-finite.
    """
    config = config or state.config
    if weights is not None:
        if len(weights) != state.n_views:
            raise ConfigError(f"Expected {state.n_views} view weights, got {len(weights)}")
        state.weights = weights
    logger.info(f"Step 3: up to {config.epochs_step3} outer iterations, alpha={config.hp.alpha}")

    previous = None
    outer = 0
    for outer in range(1, config.epochs_step3 + 1):
        if config.reimpute_each_epoch and outer > 1:
            impute_missing(state)
        view_losses = per_view_losses(state)
        state.weights = update_view_weights(view_losses, config.hp.alpha)
        breakdown = _joint_epoch(state, STEP_THREE_JOINT, outer)
        _record(state, outer, STEP_THREE_JOINT, breakdown=breakdown, view_losses=view_losses)
        weighted = _weighted_epoch(state, outer)
        _record(state, outer, STEP_THREE_WEIGHTED, weighted=weighted, view_losses=view_losses)
        if _converged(previous, breakdown.total, config.tolerance):
            logger.info(f"Step 3 converged at outer iteration {outer}")
            break
        previous = breakdown.total
    state.epochs_run[STEP_THREE_JOINT] = outer
    logger.info(f"Final view weights: {state.weights.tolist()}")
    return _result(state)


def _result(state: TrainState) -> TrainResult:
    config = state.config
    metadata: Dict[str, Any] = {
        "decisions": dict(DECISIONS),
        "trust_imputed": config.trust_imputed,
        "probability_alignment_in_objective": config.enable_probability_alignment,
        "distance_weighted_imputation": config.distance_weighted,
        "reimpute_each_epoch": config.reimpute_each_epoch,
        "seed": config.seed,
        "mask_seed": state.mask.seed,
        "paired_fraction": state.mask.paired_fraction,
        "paired": state.mask.p,
        "unpaired": state.mask.u,
        "latent_dim": config.hp.k,
        "n_clusters": config.hp.n_clusters,
        "hyperparameters": {
            "lambda1": config.hp.lambda1,
            "lambda2": config.hp.lambda2,
            "lambda3": config.hp.lambda3,
            "tau": config.hp.tau,
            "alpha": config.hp.alpha,
            "epsilon": config.hp.epsilon,
        },
        "learning_rate": config.learning_rate,
        "knn_k": config.knn_k,
        "epochs_run": dict(state.epochs_run),
        "imputed_samples": state.imputation.n_imputed if state.imputation is not None else 0,
    }
    Z = state.Z.copy()
    np.fill_diagonal(Z, 0.0)
    return TrainResult(
        Z=Z,
        weights=state.weights,
        params=state.params,
        loss_history=list(state.history),
        metadata=metadata,
        fused=fused_representation(state),
        imputation=state.imputation,
    )


def train(dataset: MultiViewDataset, mask: PairingMask, config: TrainConfig) -> TrainResult:
    """step_one -> knn imputation -> step_three."""
    state = step_one(dataset, mask, config)
    impute_missing(state)
    trained = step_three(state)
    logger.success(f"Training finished: {len(trained.loss_history)} epochs logged")
    return trained


def head_assignments(result: TrainResult) -> np.ndarray:
    """
    Argmax of the cluster head on the fused representation.

    Reporting only: the objective scores the head on each view's latent (the
    alignment and entropy terms); fused-H probabilities never enter a loss.
    """
    return cluster_probabilities(result.params.head, result.fused).data.argmax(axis=1)


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
]
