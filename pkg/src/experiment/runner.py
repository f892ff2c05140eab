"""
Paired-fraction sweep: every (fraction, repeat) cell runs the full pipeline
mask -> train -> affinity -> spectral clustering -> ACC/NMI.

Cell (f, r) uses seed base_seed + r for both its pairing mask and network
initialization. Cells are independent and may run in a process pool; results
are sorted by (fraction, repeat) before aggregation so the report does not
depend on completion order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.experiment_config import LAMBDA_GRID, ExperimentConfig, config_to_dict
from src.clustering.spectral import ClusterLabels, affinity_from_Z, spectral_cluster
from src.data.dataset import MultiViewDataset
from src.data.masks import PairingMask, make_pairing_mask
from src.metrics.scores import acc, nmi
from src.training.trainer import DECISIONS, TrainResult, train
from src.utils.errors import ConfigError
from src.utils.logger import logger

SUBSTITUTIONS = {
    "encoder": "MLP encoders replace vision-transformer fine-tuning; imputation still runs on encoder outputs",
}


@dataclass
class CellResult:
    fraction: float
    repeat: int
    seed: int
    acc: Optional[float] = None
    nmi: Optional[float] = None
    weights: List[float] = field(default_factory=list)
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class FractionSummary:
    fraction: float
    runs: List[CellResult]

    @property
    def complete(self) -> bool:
        return all(run.ok for run in self.runs)

    @property
    def failure(self) -> Optional[str]:
        for run in self.runs:
            if not run.ok:
                return run.error
        return None

    def _values(self, metric: str) -> np.ndarray:
        return np.array([getattr(run, metric) for run in self.runs if run.ok], dtype=np.float64)

    def mean(self, metric: str) -> Optional[float]:
        values = self._values(metric)
        return float(values.mean()) if self.complete and values.size else None

    def std(self, metric: str) -> Optional[float]:
        values = self._values(metric)
        return float(values.std(ddof=0)) if self.complete and values.size else None

    def mean_weights(self) -> Optional[List[float]]:
        if not self.complete:
            return None
        return [float(x) for x in np.mean([run.weights for run in self.runs], axis=0)]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    n_clusters: int
    summaries: List[FractionSummary]
    metadata: Dict[str, Any]

    @property
    def complete(self) -> bool:
        return all(summary.complete for summary in self.summaries)

    def runs(self) -> List[CellResult]:
        return [run for summary in self.summaries for run in summary.runs]


@dataclass(eq=False)
class PipelineOutput:
    mask: PairingMask
    result: TrainResult
    clusters: ClusterLabels


def run_pipeline(
    config: ExperimentConfig,
    dataset: MultiViewDataset,
    n_clusters: int,
    fraction: float,
    seed: int,
) -> PipelineOutput:
    """mask -> train -> affinity -> spectral clustering for one seed."""
    mask = make_pairing_mask(dataset.n_samples, fraction, dataset.n_views, seed, config.unpaired_policy)
    result = train(dataset, mask, config.train_config_for(n_clusters, seed))
    clusters = spectral_cluster(
        affinity_from_Z(result.Z),
        n_clusters,
        seed=seed,
        restarts=config.kmeans_restarts,
        eigensolver=config.eigensolver,
    )
    return PipelineOutput(mask, result, clusters)


def run_cell(
    config: ExperimentConfig,
    dataset: MultiViewDataset,
    n_clusters: int,
    fraction: float,
    repeat: int,
) -> CellResult:
    """One full pipeline run; any failure is recorded on the result instead of raised."""
    seed = config.base_seed + repeat
    cell = CellResult(fraction=fraction, repeat=repeat, seed=seed)
    started = time.perf_counter()
    try:
        output = run_pipeline(config, dataset, n_clusters, fraction, seed)
        cell.acc = acc(dataset.labels, output.clusters.labels)
        cell.nmi = nmi(dataset.labels, output.clusters.labels)
        cell.weights = output.result.weights.tolist()
        logger.info(f"Cell fraction={fraction} repeat={repeat}: ACC={cell.acc:.4f} NMI={cell.nmi:.4f}")
    except Exception as e:
        logger.exception(f"Cell fraction={fraction} repeat={repeat} failed")
        cell.error = f"{type(e).__name__}: {e}"
    cell.wall_time = time.perf_counter() - started
    return cell


def _run_cells(
    config: ExperimentConfig,
    dataset: MultiViewDataset,
    n_clusters: int,
    jobs: int,
) -> List[CellResult]:
    cells = [(f, r) for f in config.paired_fractions for r in range(config.repeats)]
    if jobs <= 1 or len(cells) == 1:
        results = [run_cell(config, dataset, n_clusters, f, r) for f, r in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_cell, config, dataset, n_clusters, f, r) for f, r in cells]
            results = [future.result() for future in futures]
    return sorted(results, key=lambda cell: (cell.fraction, cell.repeat))


def _metadata(config: ExperimentConfig, dataset: MultiViewDataset, n_clusters: int) -> Dict[str, Any]:
    return {
        "config": config_to_dict(config),
        "dataset": {"name": dataset.name, "n_samples": dataset.n_samples, "dims": dataset.dims},
        "n_clusters": n_clusters,
        "seed_rule": "mask and network seed = base_seed + repeat",
        "fraction_semantics": {
            "paired_fraction": "share of samples observed in every view",
            "missing_rate": {f"{f:g}": round(1.0 - f, 12) for f in config.paired_fractions},
        },
        "std": "population (ddof=0) over repeats",
        "decisions": dict(DECISIONS),
        "substitutions": dict(SUBSTITUTIONS),
    }


def run_experiment(
    config: ExperimentConfig,
    jobs: int = 1,
    dataset: Optional[MultiViewDataset] = None,
) -> ExperimentReport:
    """
    Run every (fraction, repeat) cell and aggregate mean/std per fraction.

    Raises:
        ConfigError: the dataset has no ground-truth labels.
    """
    dataset = dataset if dataset is not None else config.dataset.load(config.normalize)
    if dataset.labels is None:
        raise ConfigError("Experiments need ground-truth labels to score ACC and NMI")
    n_clusters = config.resolve_clusters(dataset)
    logger.info(
        f"Experiment: {len(config.paired_fractions)} fractions x {config.repeats} repeats, "
        f"K={n_clusters}, jobs={jobs}"
    )
    results = _run_cells(config, dataset, n_clusters, jobs)
    summaries = [
        FractionSummary(fraction=f, runs=[cell for cell in results if cell.fraction == f])
        for f in sorted(set(config.paired_fractions))
    ]
    report = ExperimentReport(config, n_clusters, summaries, _metadata(config, dataset, n_clusters))
    failed = sum(1 for cell in results if not cell.ok)
    if failed:
        logger.warning(f"{failed} of {len(results)} cells failed")
    else:
        logger.success(f"Experiment finished: {len(results)} cells")
    return report


def run_lambda_grid(
    config: ExperimentConfig,
    jobs: int = 1,
    grid: Tuple[float, ...] = LAMBDA_GRID,
) -> List[Tuple[float, ExperimentReport]]:
    """Repeat the sweep once per value, applied to lambda1 = lambda2 = lambda3."""
    dataset = config.dataset.load(config.normalize)
    reports = []
    for value in grid:
        hp = replace(config.train.hp, lambda1=value, lambda2=value, lambda3=value)
        reports.append((value, run_experiment(replace(config, train=replace(config.train, hp=hp)), jobs, dataset)))
    return reports


__all__ = [
    "CellResult",
    "FractionSummary",
    "ExperimentReport",
    "PipelineOutput",
    "run_pipeline",
    "run_cell",
    "run_experiment",
    "run_lambda_grid",
]
