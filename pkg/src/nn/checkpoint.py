"""
JSON parameter checkpoints.

Format ("pvc-mc-parameters/1"):
    {"format": ..., "networks": [
        {"name": "encoder0", "role": "encoder", "view": 0,
         "layers": [{"activation": "relu",
                     "weight": {"shape": [d, h], "values": [...]},
                     "bias": {"shape": [h], "values": [...]}}, ...]}, ...]}
Values are flat row-major lists; json writes floats with repr(), which is the
shortest string that parses back to the identical float64, so the round trip
is exact.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from src.nn.autodiff import Tensor
from src.nn.networks import CLUSTER_HEAD, DECODER, ENCODER, Layer, MLPNetwork, ParameterSet
from src.utils.errors import ConfigError

FORMAT = "pvc-mc-parameters/1"


def _array_to_json(array: np.ndarray) -> Dict[str, Any]:
    return {"shape": list(array.shape), "values": [float(x) for x in array.ravel()]}


def _array_from_json(payload: Dict[str, Any]) -> np.ndarray:
    values = np.asarray(payload["values"], dtype=np.float64)
    return values.reshape(payload["shape"])


def parameters_to_dict(params: ParameterSet) -> Dict[str, Any]:
    networks = []
    for name, net in params.networks():
        networks.append({
            "name": name,
            "role": net.role,
            "view": net.view,
            "layers": [
                {
                    "activation": layer.activation,
                    "weight": _array_to_json(layer.weight.data),
                    "bias": _array_to_json(layer.bias.data),
                }
                for layer in net.layers
            ],
        })
    return {"format": FORMAT, "networks": networks}


def parameters_from_dict(payload: Dict[str, Any]) -> ParameterSet:
    if payload.get("format") != FORMAT:
        raise ConfigError(f"Unsupported checkpoint format: {payload.get('format')!r}")
    by_role = {ENCODER: [], DECODER: [], CLUSTER_HEAD: []}
    for entry in payload["networks"]:
        layers = [
            Layer(
                weight=Tensor(_array_from_json(layer["weight"]), requires_grad=True),
                bias=Tensor(_array_from_json(layer["bias"]), requires_grad=True),
                activation=layer["activation"],
            )
            for layer in entry["layers"]
        ]
        by_role[entry["role"]].append(MLPNetwork(role=entry["role"], layers=layers, view=entry.get("view")))
    if len(by_role[CLUSTER_HEAD]) != 1:
        raise ConfigError("Checkpoint must contain exactly one cluster head")
    return ParameterSet(encoders=by_role[ENCODER], decoders=by_role[DECODER], head=by_role[CLUSTER_HEAD][0])


def save_parameters(params: ParameterSet, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(parameters_to_dict(params)), encoding="utf-8")
    return path


def load_parameters(path: Union[str, Path]) -> ParameterSet:
    return parameters_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
