"""
Seeded k-means with k-means++ initialization and best-of-restarts selection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from src.utils.errors import ConfigError, ShapeError


@dataclass(eq=False)
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    trace: List[float]
    restart: int


def _squared_distances(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - centers[None, :, :]
    return (diff * diff).sum(axis=2)


def kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k initial centers, each new one with probability proportional to D(x)^2."""
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    closest = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            index = rng.choice(n, p=closest / total)
        else:
            index = rng.integers(n)
        centers.append(X[index])
        closest = np.minimum(closest, ((X - X[index]) ** 2).sum(axis=1))
    return np.array(centers)


def lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = 300, tol: float = 1e-9):
    """
    Lloyd iterations from the given centers.

    Returns (labels, centers, inertia, trace) where trace holds the inertia
    after every assignment step; it is non-increasing. Empty clusters keep
    their previous center.
    """
    centers = centers.copy()
    trace: List[float] = []
    labels = np.zeros(X.shape[0], dtype=np.int64)
    for _ in range(max_iter):
        distances = _squared_distances(X, centers)
        new_labels = distances.argmin(axis=1)
        inertia = float(distances[np.arange(X.shape[0]), new_labels].sum())
        stalled = bool(trace) and (trace[-1] - inertia) <= tol
        unchanged = bool(trace) and np.array_equal(new_labels, labels)
        labels = new_labels
        trace.append(inertia)
        if stalled or unchanged:
            break
        for j in range(centers.shape[0]):
            members = labels == j
            if members.any():
                centers[j] = X[members].mean(axis=0)
    return labels, centers, trace[-1], trace


def kmeans(
    X: np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = 50,
    max_iter: int = 300,
    tol: float = 1e-9,
) -> KMeansResult:
    """
    Best of `restarts` k-means++ runs by inertia; ties keep the earlier restart.

    Restart r draws from the r-th child of SeedSequence(seed), so any single
    restart can be reproduced on its own.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"k-means expects an n x d matrix, got shape {X.shape}")
    if not 1 <= k <= X.shape[0]:
        raise ConfigError(f"k must be in [1, n={X.shape[0]}], got {k}")
    if restarts < 1 or max_iter < 1:
        raise ConfigError(f"restarts and max_iter must be >= 1, got {restarts}, {max_iter}")

    best = None
    for restart, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        labels, centers, inertia, trace = lloyd(X, kmeans_plus_plus(X, k, rng), max_iter, tol)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels=labels, centers=centers, inertia=inertia, trace=trace, restart=restart)
    return best


__all__ = ["KMeansResult", "kmeans", "kmeans_plus_plus", "lloyd"]
