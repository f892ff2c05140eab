"""
Clustering accuracy and normalized mutual information.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.metrics.hungarian import hungarian
from src.utils.errors import ShapeError


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """counts[i, j] = samples with the i-th true class and the j-th predicted cluster."""

    counts: np.ndarray
    true_classes: np.ndarray
    predicted_clusters: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _labels_pair(y: Sequence[int], l: Sequence[int]):
    y = np.asarray(y).ravel()
    l = np.asarray(l).ravel()
    if y.shape != l.shape:
        raise ShapeError(f"Label vectors differ in length: {y.size} vs {l.size}")
    if y.size == 0:
        raise ShapeError("Label vectors must not be empty")
    return y, l


def contingency_table(y: Sequence[int], l: Sequence[int]) -> ContingencyTable:
    y, l = _labels_pair(y, l)
    true_classes, y_index = np.unique(y, return_inverse=True)
    predicted_clusters, l_index = np.unique(l, return_inverse=True)
    counts = np.zeros((true_classes.size, predicted_clusters.size), dtype=np.int64)
    np.add.at(counts, (y_index, l_index), 1)
    return ContingencyTable(counts, true_classes, predicted_clusters)


def acc(y: Sequence[int], l: Sequence[int]) -> float:
    """Fraction of samples whose predicted cluster maps to their true class under the best one-to-one map."""
    table = contingency_table(y, l)
    counts = table.counts
    assignment, _ = hungarian(-counts.T.astype(np.float64))
    matched = 0
    for cluster, cls in enumerate(assignment[: counts.shape[1]]):
        if cls < counts.shape[0]:
            matched += counts[cls, cluster]
    return matched / table.n


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(y: Sequence[int], l: Sequence[int]) -> float:
    """I(y; l) / max(H(y), H(l)) with natural logs; 0 when both partitions are constant."""
    table = contingency_table(y, l)
    counts = table.counts.astype(np.float64)
    n = table.n
    h_true = _entropy(counts.sum(axis=1), n)
    h_pred = _entropy(counts.sum(axis=0), n)
    denominator = max(h_true, h_pred)
    if denominator == 0:
        return 0.0
    rows, cols = np.nonzero(counts)
    joint = counts[rows, cols] / n
    marginal_true = counts.sum(axis=1)[rows] / n
    marginal_pred = counts.sum(axis=0)[cols] / n
    mutual = float((joint * np.log(joint / (marginal_true * marginal_pred))).sum())
    return min(max(mutual / denominator, 0.0), 1.0)


__all__ = ["ContingencyTable", "contingency_table", "acc", "nmi"]
