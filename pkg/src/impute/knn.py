"""
Cross-view KNN imputation in latent space.

For a sample missing view m, its neighbors are the k paired samples closest
(Euclidean) in the latent space of the views the sample does observe; for
V > 2 the observed latents are concatenated. The imputed view-m row is the
mean of the neighbors' raw view-m rows. Ties in distance go to the lower
sample index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.data.dataset import MultiViewDataset, ViewMatrix
from src.data.masks import PairingMask
from src.nn.autodiff import Tensor
from src.utils.errors import ConfigError, ImputationError, ShapeError
from src.utils.logger import logger

EmbeddingLike = Union[Tensor, np.ndarray]


@dataclass(frozen=True, eq=False)
class ImputationResult:
    completed_views: List[ViewMatrix]
    neighbor_ids: Dict[int, Tuple[int, ...]]
    k: int
    missing_views: Dict[int, Tuple[int, ...]] = field(default_factory=dict)

    @property
    def n_imputed(self) -> int:
        return len(self.neighbor_ids)

    def values(self) -> List[np.ndarray]:
        return [view.values for view in self.completed_views]


def _as_array(embedding: EmbeddingLike) -> np.ndarray:
    return embedding.data if isinstance(embedding, Tensor) else np.asarray(embedding, dtype=np.float64)


def nearest_paired(query: np.ndarray, reference: np.ndarray, reference_ids: np.ndarray, k: int):
    """
    k nearest reference rows to each query row.

    Returns (ids, distances), both q x k. The sort key is (distance, sample id)
    so the order is total.
    """
    diff = query[:, None, :] - reference[None, :, :]
    distances = np.sqrt((diff * diff).sum(axis=2))
    ids = np.empty((query.shape[0], k), dtype=np.int64)
    chosen = np.empty((query.shape[0], k))
    for row in range(query.shape[0]):
        order = np.lexsort((reference_ids, distances[row]))[:k]
        ids[row] = reference_ids[order]
        chosen[row] = distances[row, order]
    return ids, chosen


def _weighted_mean(rows: np.ndarray, distances: np.ndarray, distance_weighted: bool) -> np.ndarray:
    if not distance_weighted:
        return rows.mean(axis=0)
    exact = distances == 0
    if exact.any():
        return rows[exact].mean(axis=0)
    inverse = 1.0 / distances
    return (inverse / inverse.sum()) @ rows


def knn_impute(
    dataset: MultiViewDataset,
    mask: PairingMask,
    embeddings: Sequence[EmbeddingLike],
    k: int = 5,
    distance_weighted: bool = False,
) -> ImputationResult:
    """
    Fill every unobserved view row from its k nearest paired samples.

    Observed rows are copied bit-for-bit. Samples that observe the same set of
    views share one distance computation.

    Raises:
        ConfigError: k < 1.
        ImputationError: fewer than k paired samples.
        ShapeError: embeddings do not cover every view and sample.
    """
    if k < 1:
        raise ConfigError(f"knn k must be >= 1, got {k}")
    n, V = dataset.n_samples, dataset.n_views
    if mask.observed.shape != (n, V):
        raise ShapeError(f"Mask shape {mask.observed.shape} does not match dataset ({n}, {V})")
    latents = [_as_array(e) for e in embeddings]
    if len(latents) != V or any(H.shape[0] != n for H in latents):
        raise ShapeError(f"Need one n x k embedding per view ({V} views, n={n})")

    completed = [view.values.copy() for view in dataset.views]
    neighbor_ids: Dict[int, Tuple[int, ...]] = {}
    missing_views: Dict[int, Tuple[int, ...]] = {}

    unpaired = np.flatnonzero(~mask.paired)
    if unpaired.size == 0:
        return ImputationResult(list(dataset.views), neighbor_ids, k, missing_views)

    paired = mask.paired_indices
    if paired.size < k:
        raise ImputationError(f"KNN imputation needs at least k={k} paired samples, found {paired.size}")

    patterns: Dict[Tuple[bool, ...], List[int]] = {}
    for i in unpaired:
        patterns.setdefault(tuple(mask.observed[i]), []).append(int(i))

    for pattern, samples in sorted(patterns.items()):
        seen = [v for v in range(V) if pattern[v]]
        unseen = [v for v in range(V) if not pattern[v]]
        rows = np.asarray(samples)
        query = np.concatenate([latents[v][rows] for v in seen], axis=1)
        reference = np.concatenate([latents[v][paired] for v in seen], axis=1)
        ids, distances = nearest_paired(query, reference, paired, k)
        for row, sample in enumerate(samples):
            for m in unseen:
                neighbors = dataset.views[m].values[ids[row]]
                completed[m][sample] = _weighted_mean(neighbors, distances[row], distance_weighted)
            neighbor_ids[sample] = tuple(int(j) for j in ids[row])
            missing_views[sample] = tuple(unseen)

    logger.info(f"Imputed {len(neighbor_ids)} samples from {paired.size} paired neighbors (k={k})")
    views = [ViewMatrix(values, view.view_id) for values, view in zip(completed, dataset.views)]
    return ImputationResult(views, dict(sorted(neighbor_ids.items())), k, dict(sorted(missing_views.items())))


def dump_neighbors(result: ImputationResult, path: Union[str, Path]) -> Path:
    """Audit CSV: sample_id, missing_view, neighbor_1 .. neighbor_k (one row per imputed view)."""
    records = []
    for sample, neighbors in result.neighbor_ids.items():
        for view in result.missing_views.get(sample, ()):
            record = {"sample_id": sample, "missing_view": view}
            record.update({f"neighbor_{j + 1}": neighbor for j, neighbor in enumerate(neighbors)})
            records.append(record)
    columns = ["sample_id", "missing_view"] + [f"neighbor_{j + 1}" for j in range(result.k)]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame.from_records(records, columns=columns).to_csv(path, index=False)
    return path


__all__ = ["ImputationResult", "knn_impute", "nearest_paired", "dump_neighbors"]
