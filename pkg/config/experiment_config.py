"""
Experiment configuration: JSON file format, defaults and command-line overrides.

A config file mirrors ExperimentConfig:
    {
      "dataset": {"manifest": "data/hw/manifest.json"}
                 | {"synthetic": {"n_clusters": 3, "n": 150, "dims": [10, 10], "separation": 10.0, "seed": 0}},
      "paired_fractions": [0.1, 0.3, 0.5, 0.7, 0.9],
      "repeats": 10,
      "base_seed": 0,
      "n_clusters": 3,
      "normalize": "minmax",
      "unpaired_policy": "drop-one",
      "eigensolver": "eigh",
      "kmeans_restarts": 50,
      "train": {"lambda1": 0.001, "lambda2": 0.001, "lambda3": 0.001, "tau": 0.5, "alpha": 0.1,
                "latent_dim": null, "epochs_step1": 500, "epochs_step3": 200, "learning_rate": 0.0001,
                "knn_k": 5, ...}
    }
Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from src.data.dataset import MultiViewDataset, load_dataset, normalize_dataset
from src.data.masks import UNPAIRED_POLICIES
from src.data.synthetic import generate_synthetic
from src.objectives.losses import Hyperparameters
from src.training.trainer import TrainConfig
from src.utils.errors import ConfigError

DEFAULT_PAIRED_FRACTIONS = (0.1, 0.3, 0.5, 0.7, 0.9)
DEFAULT_REPEATS = 10
LAMBDA_GRID = (0.001, 0.01, 0.1, 10.0, 100.0)
EIGENSOLVER_NAMES = ("eigh", "jacobi")

HP_KEYS = ("lambda1", "lambda2", "lambda3", "tau", "alpha", "latent_dim", "epsilon")
TRAIN_KEYS = tuple(f.name for f in fields(TrainConfig) if f.name not in ("hp", "seed"))


@dataclass(frozen=True)
class SyntheticSource:
    n_clusters: int = 3
    n: int = 150
    dims: Tuple[int, ...] = (10, 10)
    separation: float = 10.0
    seed: int = 0
    noise_view: Optional[int] = None
    noise_scale: float = 1.0

    def generate(self) -> MultiViewDataset:
        return generate_synthetic(
            self.n_clusters,
            self.n,
            self.dims,
            self.separation,
            self.seed,
            noise_view=self.noise_view,
            noise_scale=self.noise_scale,
        )


@dataclass(frozen=True)
class DatasetSource:
    """Exactly one of a manifest path or a synthetic recipe."""

    manifest: Optional[str] = None
    synthetic: Optional[SyntheticSource] = None

    def __post_init__(self):
        if (self.manifest is None) == (self.synthetic is None):
            raise ConfigError("dataset must name exactly one of 'manifest' or 'synthetic'")

    def load(self, normalize: str = "minmax") -> MultiViewDataset:
        if self.manifest is not None:
            # manifests carry their own normalization
            return load_dataset(self.manifest)
        return normalize_dataset(self.synthetic.generate(), normalize)

    def describe(self) -> Dict[str, Any]:
        if self.manifest is not None:
            return {"manifest": self.manifest}
        return {"synthetic": asdict(self.synthetic)}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSource = field(default_factory=lambda: DatasetSource(synthetic=SyntheticSource()))
    paired_fractions: Tuple[float, ...] = DEFAULT_PAIRED_FRACTIONS
    repeats: int = DEFAULT_REPEATS
    base_seed: int = 0
    n_clusters: Optional[int] = None
    normalize: str = "minmax"
    unpaired_policy: str = "drop-one"
    eigensolver: str = "eigh"
    kmeans_restarts: int = 50
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        fractions = tuple(dict.fromkeys(float(f) for f in self.paired_fractions))
        if not fractions:
            raise ConfigError("paired_fractions must not be empty")
        bad = [f for f in fractions if not 0.0 < f <= 1.0]
        if bad:
            raise ConfigError(f"paired_fractions must lie in (0, 1], got {bad}")
        object.__setattr__(self, "paired_fractions", fractions)
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        if self.n_clusters is not None and self.n_clusters < 2:
            raise ConfigError(f"n_clusters must be >= 2, got {self.n_clusters}")
        if self.unpaired_policy not in UNPAIRED_POLICIES:
            raise ConfigError(f"unpaired_policy must be one of {UNPAIRED_POLICIES}, got {self.unpaired_policy!r}")
        if self.eigensolver not in EIGENSOLVER_NAMES:
            raise ConfigError(f"eigensolver must be one of {EIGENSOLVER_NAMES}, got {self.eigensolver!r}")
        if self.kmeans_restarts < 1:
            raise ConfigError(f"kmeans_restarts must be >= 1, got {self.kmeans_restarts}")

    def resolve_clusters(self, dataset: MultiViewDataset) -> int:
        """Configured K, else the number of distinct ground-truth labels."""
        if self.n_clusters is not None:
            return self.n_clusters
        if self.dataset.synthetic is not None:
            return self.dataset.synthetic.n_clusters
        if dataset.labels is None:
            raise ConfigError("n_clusters is required when the dataset has no labels")
        return dataset.n_classes

    def train_config_for(self, n_clusters: int, seed: int) -> TrainConfig:
        return replace(self.train, seed=seed, hp=replace(self.train.hp, n_clusters=n_clusters))


def _reject_unknown(section: str, payload: Mapping[str, Any], allowed) -> None:
    unknown = sorted(set(payload) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown key(s) in {section}: {', '.join(unknown)}")


def _train_from_dict(payload: Mapping[str, Any]) -> TrainConfig:
    _reject_unknown("train", payload, HP_KEYS + TRAIN_KEYS)
    hp = Hyperparameters(**{k: payload[k] for k in HP_KEYS if k in payload})
    return TrainConfig(hp=hp, **{k: payload[k] for k in TRAIN_KEYS if k in payload})


def _dataset_from_dict(payload: Mapping[str, Any], base: Optional[Path]) -> DatasetSource:
    _reject_unknown("dataset", payload, ("manifest", "synthetic"))
    manifest = payload.get("manifest")
    if manifest is not None and base is not None and not Path(manifest).is_absolute():
        manifest = str(base / manifest)
    synthetic = payload.get("synthetic")
    if synthetic is not None:
        _reject_unknown("dataset.synthetic", synthetic, [f.name for f in fields(SyntheticSource)])
        synthetic = dict(synthetic)
        if "dims" in synthetic:
            synthetic["dims"] = tuple(int(d) for d in synthetic["dims"])
        synthetic = SyntheticSource(**synthetic)
    return DatasetSource(manifest=manifest, synthetic=synthetic)


def experiment_config_from_dict(payload: Mapping[str, Any], base: Optional[Path] = None) -> ExperimentConfig:
    """
    Build an ExperimentConfig from parsed JSON. Relative manifest paths resolve
    against `base` (the config file's directory).

    Raises:
        ConfigError: unknown keys or invalid values.
    """
    allowed = [f.name for f in fields(ExperimentConfig)]
    _reject_unknown("experiment config", payload, allowed)
    kwargs: Dict[str, Any] = {k: v for k, v in payload.items() if k not in ("dataset", "train")}
    if "paired_fractions" in kwargs:
        kwargs["paired_fractions"] = tuple(kwargs["paired_fractions"])
    if "dataset" in payload:
        kwargs["dataset"] = _dataset_from_dict(payload["dataset"], base)
    if "train" in payload:
        kwargs["train"] = _train_from_dict(payload["train"])
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as e:
        raise ConfigError(f"Invalid experiment config: {e}")


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON (line {e.lineno}): {e.msg}")
    if not isinstance(payload, dict):
        raise ConfigError(f"Config file {path} must contain a JSON object")
    return experiment_config_from_dict(payload, base=path.parent)


def apply_overrides(config: ExperimentConfig, overrides: Mapping[str, Any]) -> ExperimentConfig:
    """
    Apply command-line overrides; None values are ignored.

    Recognized keys: paired_fraction, paired_fractions, repeats, seed, clusters,
    k_latent, lambda1, lambda2, lambda3, alpha, tau, knn_k, plus any TrainConfig
    field name.
    """
    overrides = {k: v for k, v in overrides.items() if v is not None}
    top: Dict[str, Any] = {}
    hp: Dict[str, Any] = {}
    train: Dict[str, Any] = {}
    for key, value in overrides.items():
        if key == "paired_fraction":
            top["paired_fractions"] = (float(value),)
        elif key == "paired_fractions":
            top["paired_fractions"] = tuple(float(v) for v in value)
        elif key == "repeats":
            top["repeats"] = int(value)
        elif key == "seed":
            top["base_seed"] = int(value)
        elif key == "clusters":
            top["n_clusters"] = int(value)
        elif key == "k_latent":
            hp["latent_dim"] = int(value)
        elif key in HP_KEYS:
            hp[key] = value
        elif key in TRAIN_KEYS:
            train[key] = value
        else:
            raise ConfigError(f"Unknown override {key!r}")
    new_train = config.train
    if hp:
        new_train = replace(new_train, hp=replace(new_train.hp, **hp))
    if train:
        new_train = replace(new_train, **train)
    return replace(config, train=new_train, **top)


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    """JSON-ready view of a config, the inverse of experiment_config_from_dict."""
    train = {k: getattr(config.train.hp, k) for k in HP_KEYS}
    train.update({k: getattr(config.train, k) for k in TRAIN_KEYS})
    return {
        "dataset": config.dataset.describe(),
        "paired_fractions": list(config.paired_fractions),
        "repeats": config.repeats,
        "base_seed": config.base_seed,
        "n_clusters": config.n_clusters,
        "normalize": config.normalize,
        "unpaired_policy": config.unpaired_policy,
        "eigensolver": config.eigensolver,
        "kmeans_restarts": config.kmeans_restarts,
        "train": train,
    }


__all__ = [
    "DEFAULT_PAIRED_FRACTIONS",
    "DEFAULT_REPEATS",
    "LAMBDA_GRID",
    "SyntheticSource",
    "DatasetSource",
    "ExperimentConfig",
    "experiment_config_from_dict",
    "load_experiment_config",
    "apply_overrides",
    "config_to_dict",
]
