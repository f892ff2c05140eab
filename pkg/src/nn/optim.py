"""Adam with bias correction (defaults beta1=0.9, beta2=0.999, eps=1e-8)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from src.nn.autodiff import Tensor
from src.utils.errors import ConfigError, ShapeError


@dataclass
class AdamState:
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")


def adam_step(
    params: Sequence[Tensor],
    grads: Sequence[np.ndarray],
    state: AdamState,
) -> Tuple[Sequence[Tensor], AdamState]:
    """
    One in-place Adam update of `params`.

    Moments are allocated lazily on the first call; afterwards the parameter
    list must keep the same order and shapes.
    """
    if len(params) != len(grads):
        raise ShapeError(f"{len(params)} parameters but {len(grads)} gradients")
    if not state.m:
        state.m = [np.zeros_like(p.data) for p in params]
        state.v = [np.zeros_like(p.data) for p in params]
    if len(state.m) != len(params):
        raise ShapeError(f"Adam state tracks {len(state.m)} parameters, got {len(params)}")

    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t

    for param, grad, m, v in zip(params, grads, state.m, state.v):
        if grad.shape != param.data.shape or m.shape != param.data.shape:
            raise ShapeError(f"Gradient shape {grad.shape} does not match parameter {param.data.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * (grad * grad)
        m_hat = m / bc1
        v_hat = v / bc2
        param.data -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)

    return params, state
