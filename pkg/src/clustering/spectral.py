"""
Affinity from the self-expression matrix and normalized spectral clustering.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from src.clustering.eigen import EIGENSOLVERS
from src.clustering.kmeans import kmeans
from src.utils.errors import ConfigError, ShapeError
from src.utils.logger import logger

DEGREE_EPSILON = 1e-12


@dataclass(eq=False)
class ClusterLabels:
    labels: np.ndarray
    n_clusters: int
    eigenvalues: np.ndarray
    embedding: np.ndarray
    inertia: float

    def __post_init__(self):
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_clusters):
            raise ConfigError(f"Labels must lie in [0, {self.n_clusters})")


def affinity_from_Z(Z: np.ndarray) -> np.ndarray:
    """S = (|Z| + |Z|^T) / 2; exactly symmetric and non-negative."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ShapeError(f"Z must be square, got shape {Z.shape}")
    magnitude = np.abs(Z)
    return 0.5 * (magnitude + magnitude.T)


def normalized_laplacian(S: np.ndarray) -> np.ndarray:
    """
    L = I - D^-1/2 S D^-1/2. Zero-degree rows use degree 1e-12, which leaves
    them as identity rows.
    """
    S = np.asarray(S, dtype=np.float64)
    degree = S.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(np.where(degree > 0, degree, DEGREE_EPSILON))
    L = np.eye(S.shape[0]) - inv_sqrt[:, None] * S * inv_sqrt[None, :]
    return 0.5 * (L + L.T)


def _normalize_rows(embedding: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(embedding, axis=1, keepdims=True)
    return embedding / np.maximum(norms, DEGREE_EPSILON)


def spectral_cluster(
    S: np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = 50,
    max_iter: int = 300,
    tol: float = 1e-9,
    eigensolver: str = "eigh",
) -> ClusterLabels:
    """
    Normalized spectral clustering of an affinity matrix into k groups.

    The embedding is the k eigenvectors of the smallest Laplacian eigenvalues
    with rows scaled to unit length. k-means runs on the rows of connected
    samples; isolated samples (zero degree) join their nearest centroid.

    Raises:
        ConfigError: k < 2 or k > n, or an unknown eigensolver.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeError(f"Affinity must be square, got shape {S.shape}")
    n = S.shape[0]
    if k < 2 or k > n:
        raise ConfigError(f"Need 2 <= K <= n, got K={k}, n={n}")
    if eigensolver not in EIGENSOLVERS:
        raise ConfigError(f"Unknown eigensolver {eigensolver!r}; expected one of {sorted(EIGENSOLVERS)}")

    values, vectors = EIGENSOLVERS[eigensolver](normalized_laplacian(S), k)
    embedding = _normalize_rows(vectors)

    connected = S.sum(axis=1) > 0
    fit_rows = embedding[connected] if connected.sum() >= k else embedding
    result = kmeans(fit_rows, k, seed=seed, restarts=restarts, max_iter=max_iter, tol=tol)
    if fit_rows.shape[0] == n:
        labels = result.labels
    else:
        logger.warning(f"{int((~connected).sum())} isolated samples assigned to their nearest centroid")
        diff = embedding[:, None, :] - result.centers[None, :, :]
        labels = (diff * diff).sum(axis=2).argmin(axis=1)
        labels[connected] = result.labels
    return ClusterLabels(
        labels=labels.astype(np.int64),
        n_clusters=k,
        eigenvalues=values,
        embedding=embedding,
        inertia=result.inertia,
    )


def dump_embedding(eigenvalues: np.ndarray, embedding: np.ndarray, path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write the spectral embedding (one row per sample) and its eigenvalues as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = [f"e{j}" for j in range(embedding.shape[1])]
    frame = pd.DataFrame(embedding, columns=columns)
    frame.index.name = "sample"
    frame.to_csv(path, float_format="%.17g")
    eigen_path = path.with_name(f"{path.stem}_eigenvalues.csv")
    pd.DataFrame({"index": np.arange(len(eigenvalues)), "eigenvalue": eigenvalues}).to_csv(
        eigen_path, index=False, float_format="%.17g"
    )
    return path, eigen_path


__all__ = ["ClusterLabels", "affinity_from_Z", "normalized_laplacian", "spectral_cluster", "dump_embedding"]
