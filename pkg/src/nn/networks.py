"""
Per-view MLP encoders/decoders and the shared softmax cluster head.

Weights are Glorot-uniform in +-sqrt(6 / (fan_in + fan_out)), biases uniform in
+-1/sqrt(fan_in), and every draw comes from one seeded numpy Generator so a parameter
set is a deterministic function of (dims, latent_dim, n_clusters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.nn.autodiff import Tensor
from src.utils.errors import ConfigError, ShapeError

ENCODER = "encoder"
DECODER = "decoder"
CLUSTER_HEAD = "cluster-head"
ROLES = (ENCODER, DECODER, CLUSTER_HEAD)
ACTIVATIONS = ("relu", "identity")


@dataclass
class Layer:
    weight: Tensor
    bias: Tensor
    activation: str = "identity"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"Unknown activation {self.activation!r}")
        if self.weight.data.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ShapeError(f"Layer weight {self.weight.shape} and bias {self.bias.shape} do not match")

    @property
    def in_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[1]

    def __call__(self, x: Tensor) -> Tensor:
        out = x @ self.weight + self.bias
        return out.relu() if self.activation == "relu" else out


@dataclass
class MLPNetwork:
    """A chain of dense layers with a role tag (encoder / decoder / cluster-head)."""

    role: str
    layers: List[Layer]
    view: Optional[int] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigError(f"Unknown network role {self.role!r}")
        if not self.layers:
            raise ConfigError("A network needs at least one layer")
        for previous, current in zip(self.layers, self.layers[1:]):
            if previous.out_dim != current.in_dim:
                raise ShapeError(f"Layer dims do not chain: {previous.out_dim} -> {current.in_dim}")

    @classmethod
    def build(
        cls,
        role: str,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        hidden_width: int = 16,
        hidden_layers: int = 2,
        view: Optional[int] = None,
    ) -> "MLPNetwork":
        widths = [in_dim] + [hidden_width] * hidden_layers + [out_dim]
        layers = []
        for index, (fan_in, fan_out) in enumerate(zip(widths, widths[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weight = Tensor(rng.uniform(-limit, limit, size=(fan_in, fan_out)), requires_grad=True)
            bound = 1.0 / np.sqrt(fan_in)
            bias = Tensor(rng.uniform(-bound, bound, size=fan_out), requires_grad=True)
            is_output = index == len(widths) - 2
            layers.append(Layer(weight, bias, "identity" if is_output else "relu"))
        return cls(role=role, layers=layers, view=view)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> List[Tensor]:
        params = []
        for layer in self.layers:
            params.extend((layer.weight, layer.bias))
        return params

    def forward(self, x: Union[Tensor, np.ndarray]) -> Tensor:
        x = x if isinstance(x, Tensor) else Tensor(x)
        if x.data.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"{self.role} expects n x {self.in_dim} input, got {x.shape}")
        for layer in self.layers:
            x = layer(x)
        return x


def _require_role(net: MLPNetwork, role: str) -> None:
    if net.role != role:
        raise ConfigError(f"Expected a {role} network, got {net.role}")


def encode(net: MLPNetwork, X_v: Union[Tensor, np.ndarray]) -> Tensor:
    """H(v) = f(X(v); theta_e_v), n x k."""
    _require_role(net, ENCODER)
    return net.forward(X_v)


def decode(net: MLPNetwork, H_v: Union[Tensor, np.ndarray]) -> Tensor:
    """Reconstruction of view v from its latent, n x d_v."""
    _require_role(net, DECODER)
    return net.forward(H_v)


def cluster_probabilities(head: MLPNetwork, H: Union[Tensor, np.ndarray]) -> Tensor:
    """Row-wise softmax of the cluster head's logits, n x K."""
    _require_role(head, CLUSTER_HEAD)
    if head.out_dim < 2:
        raise ConfigError(f"Cluster head needs K >= 2 outputs, got {head.out_dim}")
    return head.forward(H).softmax_rows()


@dataclass
class ParameterSet:
    """theta_e (one encoder per view), theta_d (one decoder per view) and the cluster head."""

    encoders: List[MLPNetwork]
    decoders: List[MLPNetwork]
    head: MLPNetwork

    def __post_init__(self):
        if len(self.encoders) != len(self.decoders):
            raise ConfigError("Every view needs one encoder and one decoder")
        latent = {net.out_dim for net in self.encoders} | {net.in_dim for net in self.decoders} | {self.head.in_dim}
        if len(latent) != 1:
            raise ShapeError(f"Encoders, decoders and head disagree on the latent dim: {sorted(latent)}")

    @property
    def n_views(self) -> int:
        return len(self.encoders)

    @property
    def latent_dim(self) -> int:
        return self.head.in_dim

    def networks(self) -> Iterator[Tuple[str, MLPNetwork]]:
        for v, net in enumerate(self.encoders):
            yield f"encoder{v}", net
        for v, net in enumerate(self.decoders):
            yield f"decoder{v}", net
        yield "head", self.head

    def parameters(self) -> List[Tensor]:
        params = []
        for _, net in self.networks():
            params.extend(net.parameters())
        return params

    def view_parameters(self, view: int) -> List[Tensor]:
        return self.encoders[view].parameters() + self.decoders[view].parameters()


def default_hidden_width(latent_dim: int) -> int:
    return max(16, 2 * latent_dim)


def build_parameter_set(
    dims: Sequence[int],
    latent_dim: int,
    n_clusters: int,
    seed: int,
    hidden_width: Optional[int] = None,
    hidden_layers: int = 2,
) -> ParameterSet:
    if latent_dim < 1:
        raise ConfigError(f"latent_dim must be >= 1, got {latent_dim}")
    if n_clusters < 2:
        raise ConfigError(f"n_clusters must be >= 2, got {n_clusters}")
    width = hidden_width or default_hidden_width(latent_dim)
    rng = np.random.default_rng(seed)
    encoders = [
        MLPNetwork.build(ENCODER, d, latent_dim, rng, width, hidden_layers, view=v) for v, d in enumerate(dims)
    ]
    decoders = [
        MLPNetwork.build(DECODER, latent_dim, d, rng, width, hidden_layers, view=v) for v, d in enumerate(dims)
    ]
    head = MLPNetwork.build(CLUSTER_HEAD, latent_dim, n_clusters, rng, width, hidden_layers=0)
    return ParameterSet(encoders=encoders, decoders=decoders, head=head)
