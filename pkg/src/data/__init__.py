"""
Dataset ingestion: manifests, normalization, synthetic mixtures and pairing masks.
"""

from src.data.dataset import (
    MultiViewDataset,
    ViewMatrix,
    load_dataset,
    load_labels,
    normalize,
    normalize_dataset,
    save_dataset,
)
from src.data.masks import PairingMask, make_pairing_mask, paired_count
from src.data.synthetic import generate_synthetic

__all__ = [
    "MultiViewDataset",
    "ViewMatrix",
    "PairingMask",
    "load_dataset",
    "load_labels",
    "save_dataset",
    "normalize",
    "normalize_dataset",
    "make_pairing_mask",
    "paired_count",
    "generate_synthetic",
]
