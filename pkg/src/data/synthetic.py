"""Seeded Gaussian-mixture multi-view datasets for desk-scale experiments."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from src.data.dataset import MultiViewDataset, ViewMatrix
from src.utils.errors import ConfigError


def _component_means(k: int, dim: int, separation: float, rng: np.random.Generator) -> np.ndarray:
    """k means at distance `separation` from the origin, pairwise well apart."""
    basis, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    if dim >= k:
        return separation * basis[:, :k].T
    if dim == 1:
        return separation * (np.arange(k, dtype=np.float64) - (k - 1) / 2.0)[:, None]
    angles = 2.0 * np.pi * np.arange(k) / k + rng.uniform(0.0, 2.0 * np.pi)
    circle = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return separation * circle @ basis[:, :2].T


def generate_synthetic(
    k_clusters: int,
    n: int,
    dims: Sequence[int],
    separation: float,
    seed: int,
    noise_view: Optional[int] = None,
    noise_scale: float = 1.0,
) -> MultiViewDataset:
    """
    Every view is a Gaussian mixture sharing one component assignment.

    Component means sit at distance `separation` from the origin along
    random orthogonal directions (or evenly around a random circle when the
    view has fewer dimensions than components), with unit-variance isotropic
    noise around them. Labels are
    balanced: sample i belongs to component i mod k before a seeded shuffle.
    If `noise_view` is set, that view is replaced by pure N(0, noise_scale^2)
    noise carrying no cluster information.

    Raises:
        ConfigError: k_clusters < 2, separation <= 0, n < k_clusters or fewer than two views.
    """
    if k_clusters < 2:
        raise ConfigError(f"k_clusters must be >= 2, got {k_clusters}")
    if separation <= 0:
        raise ConfigError(f"separation must be > 0, got {separation}")
    if n < k_clusters:
        raise ConfigError(f"n ({n}) must be >= k_clusters ({k_clusters})")
    if len(dims) < 2 or any(int(d) < 1 for d in dims):
        raise ConfigError(f"dims must list at least two positive view dimensions, got {list(dims)}")
    if noise_view is not None and not (0 <= noise_view < len(dims)):
        raise ConfigError(f"noise_view {noise_view} is not a valid view index")

    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % k_clusters)

    views = []
    for view_id, dim in enumerate(int(d) for d in dims):
        if view_id == noise_view:
            values = rng.normal(0.0, noise_scale, size=(n, dim))
        else:
            means = _component_means(k_clusters, dim, separation, rng)
            values = means[labels] + rng.normal(size=(n, dim))
        views.append(ViewMatrix(values, view_id))

    return MultiViewDataset(views=tuple(views), labels=labels.astype(np.int64), name=f"synthetic-k{k_clusters}-s{seed}")
