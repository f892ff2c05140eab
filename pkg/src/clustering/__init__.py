"""
Affinity construction, dense eigensolvers, k-means and spectral clustering.
"""

from src.clustering.eigen import EigenPairs, eigensolve_symmetric, jacobi_eigensolve
from src.clustering.kmeans import KMeansResult, kmeans, kmeans_plus_plus
from src.clustering.spectral import (
    ClusterLabels,
    affinity_from_Z,
    dump_embedding,
    normalized_laplacian,
    spectral_cluster,
)

__all__ = [
    "EigenPairs",
    "eigensolve_symmetric",
    "jacobi_eigensolve",
    "KMeansResult",
    "kmeans",
    "kmeans_plus_plus",
    "ClusterLabels",
    "affinity_from_Z",
    "normalized_laplacian",
    "spectral_cluster",
    "dump_embedding",
]
