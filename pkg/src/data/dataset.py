"""
Multi-view dataset types, manifest loading/saving and per-column normalization.

A manifest is a JSON file:
    {"views": ["view1.csv", "view2.csv"], "labels": "labels.csv" | null,
     "normalize": "minmax" | "zscore" | "none", "n_clusters": 5}
View files are headerless CSV (one row per sample); the label file has one
integer per line. Relative paths resolve against the manifest's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.utils.errors import DatasetError
from src.utils.logger import logger

NORMALIZE_ALIASES = {
    "minmax": "minmax",
    "min-max": "minmax",
    "zscore": "zscore",
    "z-score": "zscore",
    "none": "none",
}


@dataclass(frozen=True, eq=False)
class ViewMatrix:
    """One view: n x d_v feature matrix, rows are samples."""

    values: np.ndarray
    view_id: int

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise DatasetError(f"View {self.view_id} must be a 2-D matrix, got ndim={values.ndim}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise DatasetError(f"View {self.view_id} is empty: shape={values.shape}")
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            row, column = (int(i) for i in bad[0])
            raise DatasetError(f"View {self.view_id} contains a non-finite value", row=row, column=column)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class MultiViewDataset:
    """
    V views over the same n samples plus optional ground-truth labels.

    The constructor checks cross-view consistency only; ingestion paths
    (load_dataset, generate_synthetic) additionally require V >= 2.
    """

    views: Tuple[ViewMatrix, ...]
    labels: Optional[np.ndarray] = None
    name: str = field(default="dataset", compare=False)

    def __post_init__(self):
        views = tuple(self.views)
        if not views:
            raise DatasetError("Dataset needs at least one view")
        n = views[0].n_samples
        for view in views[1:]:
            if view.n_samples != n:
                raise DatasetError(
                    f"Row-count mismatch: view {views[0].view_id} has {n} rows, "
                    f"view {view.view_id} has {view.n_samples}"
                )
        object.__setattr__(self, "views", views)

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.ndim != 1 or labels.shape[0] != n:
                raise DatasetError(f"Label vector must have length {n}, got shape {labels.shape}")
            if not np.issubdtype(labels.dtype, np.integer):
                raise DatasetError("Labels must be integers")
            if labels.size and labels.min() < 0:
                raise DatasetError("Labels must be non-negative", row=int(np.argmin(labels)))
            labels = labels.astype(np.int64, copy=True)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.views[0].n_samples

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def dims(self) -> List[int]:
        return [view.dim for view in self.views]

    @property
    def n_classes(self) -> int:
        if self.labels is None:
            return 0
        return int(np.unique(self.labels).size)

    def require_multi_view(self) -> "MultiViewDataset":
        if self.n_views < 2:
            raise DatasetError(f"Multi-view dataset needs V >= 2, got {self.n_views}")
        return self

    def observed_views(self, observed: np.ndarray) -> List[np.ndarray]:
        """Per-view matrices with the rows a sample does not observe set to zero."""
        observed = np.asarray(observed, dtype=bool)
        if observed.shape != (self.n_samples, self.n_views):
            raise DatasetError(f"Observation matrix must be {self.n_samples} x {self.n_views}, got {observed.shape}")
        return [np.where(observed[:, [v]], view.values, 0.0) for v, view in enumerate(self.views)]

    def with_views(self, values: Sequence[np.ndarray]) -> "MultiViewDataset":
        """Same labels, new per-view matrices (view ids preserved)."""
        views = tuple(ViewMatrix(v, view.view_id) for v, view in zip(values, self.views))
        return MultiViewDataset(views=views, labels=self.labels, name=self.name)


def normalize(view: ViewMatrix, method: str = "minmax") -> ViewMatrix:
    """
    Per-column normalization.

    minmax maps each column onto [0, 1]; zscore to mean 0 and population sd 1.
    Constant columns map to 0 under either method.
    """
    method_key = NORMALIZE_ALIASES.get(method)
    if method_key is None:
        raise DatasetError(f"Unknown normalization method: {method!r}")
    values = view.values
    if method_key == "none":
        return view

    if method_key == "minmax":
        low = values.min(axis=0)
        span = values.max(axis=0) - low
        constant = span == 0
        out = (values - low) / np.where(constant, 1.0, span)
    else:
        mean = values.mean(axis=0)
        sd = values.std(axis=0)
        constant = sd == 0
        out = (values - mean) / np.where(constant, 1.0, sd)
    out[:, constant] = 0.0
    return ViewMatrix(out, view.view_id)


def normalize_dataset(dataset: MultiViewDataset, method: str = "minmax") -> MultiViewDataset:
    views = tuple(normalize(view, method) for view in dataset.views)
    return MultiViewDataset(views=views, labels=dataset.labels, name=dataset.name)


def _read_view_csv(path: Path, view_id: int) -> ViewMatrix:
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except FileNotFoundError:
        raise DatasetError("View file not found", path=str(path))
    except pd.errors.EmptyDataError:
        raise DatasetError("View file is empty", path=str(path))
    except pd.errors.ParserError as e:
        raise DatasetError(f"Malformed CSV: {e}", path=str(path))

    cells = frame.to_numpy(dtype=object)
    # object -> float64 goes through Python float(), so 17-digit values stay bit-exact
    try:
        values = cells.astype(np.float64)
    except (TypeError, ValueError):
        values = None

    if values is None or not np.isfinite(values).all():
        for (row, column), cell in np.ndenumerate(cells):
            text = "" if cell is None or (isinstance(cell, float) and np.isnan(cell)) else str(cell).strip()
            try:
                value = float(text)
            except ValueError:
                raise DatasetError(f"Non-numeric cell {text!r}", path=str(path), row=row, column=column)
            if not np.isfinite(value):
                raise DatasetError(f"Non-finite cell {text!r}", path=str(path), row=row, column=column)
    return ViewMatrix(values, view_id)


def _read_labels(path: Path, n_clusters: Optional[int]) -> np.ndarray:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise DatasetError("Label file not found", path=str(path))

    labels = []
    for row, line in enumerate(line for line in lines if line.strip()):
        text = line.strip()
        try:
            label = int(text)
        except ValueError:
            raise DatasetError(f"Non-integer label {text!r}", path=str(path), row=row)
        if label < 0 or (n_clusters is not None and label >= n_clusters):
            upper = n_clusters if n_clusters is not None else "inf"
            raise DatasetError(f"Label {label} out of range [0, {upper})", path=str(path), row=row)
        labels.append(label)
    return np.asarray(labels, dtype=np.int64)


def load_labels(path: Union[str, Path], n_clusters: Optional[int] = None) -> np.ndarray:
    """One non-negative integer label per line."""
    return _read_labels(Path(path), n_clusters)


def load_dataset(manifest: Union[str, Path]) -> MultiViewDataset:
    """
    Load and validate a dataset described by a JSON manifest.

    Raises:
        DatasetError: malformed manifest, row-count mismatch between views,
            non-numeric cells or labels out of range (with file and row index).
    """
    manifest_path = Path(manifest)
    try:
        entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DatasetError("Manifest not found", path=str(manifest_path))
    except json.JSONDecodeError as e:
        raise DatasetError(f"Manifest is not valid JSON: {e.msg}", path=str(manifest_path), row=e.lineno - 1)
    if not isinstance(entries, dict):
        raise DatasetError("Manifest must be a JSON object", path=str(manifest_path))

    view_paths = entries.get("views")
    if not isinstance(view_paths, list) or len(view_paths) < 2:
        raise DatasetError("Manifest must list at least two view files under 'views'", path=str(manifest_path))
    n_clusters = entries.get("n_clusters")
    method = entries.get("normalize", "minmax") or "none"
    if method not in NORMALIZE_ALIASES:
        raise DatasetError(f"Unknown normalize value {method!r}", path=str(manifest_path))

    base = manifest_path.parent
    logger.info(f"Loading manifest {manifest_path.name} with {len(view_paths)} views")
    views = []
    for view_id, relative in enumerate(view_paths):
        path = base / relative
        view = _read_view_csv(path, view_id)
        if views and view.n_samples != views[0].n_samples:
            raise DatasetError(
                f"Row-count mismatch: expected {views[0].n_samples} rows, found {view.n_samples}",
                path=str(path),
                row=min(view.n_samples, views[0].n_samples),
            )
        views.append(view)

    labels = None
    if entries.get("labels"):
        label_path = base / entries["labels"]
        labels = _read_labels(label_path, n_clusters)
        if labels.shape[0] != views[0].n_samples:
            raise DatasetError(
                f"Label count {labels.shape[0]} does not match {views[0].n_samples} samples",
                path=str(label_path),
                row=min(labels.shape[0], views[0].n_samples),
            )

    dataset = MultiViewDataset(views=tuple(views), labels=labels, name=manifest_path.stem).require_multi_view()
    dataset = normalize_dataset(dataset, method)
    logger.info(f"Loaded dataset n={dataset.n_samples}, dims={dataset.dims}, normalize={method}")
    return dataset


def save_dataset(dataset: MultiViewDataset, directory: Union[str, Path]) -> Path:
    """Write views, labels and a manifest (normalize='none') under `directory`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    view_files = []
    for view in dataset.views:
        filename = f"view{view.view_id}.csv"
        pd.DataFrame(view.values).to_csv(directory / filename, header=False, index=False, float_format="%.17g")
        view_files.append(filename)

    labels_file = None
    if dataset.labels is not None:
        labels_file = "labels.csv"
        (directory / labels_file).write_text(
            "".join(f"{int(label)}\n" for label in dataset.labels), encoding="utf-8"
        )

    manifest = {"views": view_files, "labels": labels_file, "normalize": "none"}
    if dataset.labels is not None:
        manifest["n_clusters"] = int(dataset.labels.max()) + 1
    manifest_path = directory / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    logger.info(f"Saved dataset ({dataset.n_views} views) to {directory}")
    return manifest_path
