"""
Minimal autodiff engine, MLP networks and the Adam update rule.
"""

from src.nn.autodiff import Tensor, backward, concat_rows
from src.nn.checkpoint import load_parameters, save_parameters
from src.nn.networks import (
    CLUSTER_HEAD,
    DECODER,
    ENCODER,
    Layer,
    MLPNetwork,
    ParameterSet,
    build_parameter_set,
    cluster_probabilities,
    decode,
    encode,
)
from src.nn.optim import AdamState, adam_step

__all__ = [
    "Tensor",
    "backward",
    "concat_rows",
    "Layer",
    "MLPNetwork",
    "ParameterSet",
    "ENCODER",
    "DECODER",
    "CLUSTER_HEAD",
    "build_parameter_set",
    "encode",
    "decode",
    "cluster_probabilities",
    "AdamState",
    "adam_step",
    "save_parameters",
    "load_parameters",
]
