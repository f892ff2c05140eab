import numpy as np
import pytest

from config.experiment_config import DatasetSource, ExperimentConfig, SyntheticSource
from src.data.dataset import MultiViewDataset, ViewMatrix, normalize_dataset
from src.data.synthetic import generate_synthetic
from src.objectives.losses import Hyperparameters
from src.training.trainer import TrainConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_dataset() -> MultiViewDataset:
    """12 samples, two clusters, views of width 3 and 4, min-max scaled."""
    return normalize_dataset(generate_synthetic(2, 12, (3, 4), 10.0, seed=3))


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(
        hp=Hyperparameters(n_clusters=2),
        epochs_step1=3,
        epochs_step3=2,
        learning_rate=1e-3,
        knn_k=2,
        hidden_width=4,
        hidden_layers=1,
    )


@pytest.fixture
def tiny_experiment() -> ExperimentConfig:
    return ExperimentConfig(
        dataset=DatasetSource(synthetic=SyntheticSource(n_clusters=2, n=30, dims=(3, 3), seed=1)),
        paired_fractions=(0.5, 1.0),
        repeats=2,
        kmeans_restarts=3,
        train=TrainConfig(epochs_step1=3, epochs_step3=2, learning_rate=1e-3, knn_k=3, hidden_width=4),
    )


def make_dataset(*views, labels=None) -> MultiViewDataset:
    return MultiViewDataset(
        views=tuple(ViewMatrix(np.asarray(v, dtype=np.float64), i) for i, v in enumerate(views)),
        labels=None if labels is None else np.asarray(labels, dtype=np.int64),
    )
