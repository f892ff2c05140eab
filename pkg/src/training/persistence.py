"""
Run artifacts: per-epoch CSV log and a result checkpoint (result.json + z.npy).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd

from src.nn.checkpoint import parameters_from_dict, parameters_to_dict
from src.training.trainer import EpochRecord, TrainResult, ViewWeights
from src.utils.logger import logger

RESULT_FILE = "result.json"
Z_FILE = "z.npy"
RUN_LOG_FILE = "run_log.csv"


def write_run_log(history: Sequence[EpochRecord], path: Union[str, Path]) -> Path:
    """One row per logged epoch: epoch, phase, loss breakdown, per-view losses and weights."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame.from_records([record.as_row() for record in history])
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def save_result(result: TrainResult, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = {
        "weights": result.weights.tolist(),
        "metadata": result.metadata,
        "history": [record.as_row() for record in result.loss_history],
        "parameters": parameters_to_dict(result.params),
    }
    (directory / RESULT_FILE).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    np.save(directory / Z_FILE, result.Z)
    write_run_log(result.loss_history, directory / RUN_LOG_FILE)
    logger.info(f"Saved training result to {directory}")
    return directory


def load_result_arrays(directory: Union[str, Path]):
    """(Z, weights, parameters, metadata) from a saved result directory."""
    directory = Path(directory)
    payload = json.loads((directory / RESULT_FILE).read_text(encoding="utf-8"))
    Z = np.load(directory / Z_FILE)
    return Z, ViewWeights(payload["weights"]), parameters_from_dict(payload["parameters"]), payload["metadata"]


__all__ = ["write_run_log", "save_result", "load_result_arrays", "RESULT_FILE", "Z_FILE", "RUN_LOG_FILE"]
