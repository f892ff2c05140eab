"""
Missing-view imputation.
"""

from src.impute.knn import ImputationResult, dump_neighbors, knn_impute, nearest_paired

__all__ = ["ImputationResult", "knn_impute", "nearest_paired", "dump_neighbors"]
