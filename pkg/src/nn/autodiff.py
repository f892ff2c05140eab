"""
Reverse-mode automatic differentiation over dense float64 numpy arrays.

Each Tensor records the parents it was computed from and a closure mapping
the upstream gradient to one gradient per parent. `backward(loss, params)`
walks the recorded graph in reverse topological order. A graph belongs to a
single thread; parameters may be handed to another thread between steps.
"""

from __future__ import annotations

from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.errors import NumericalError, ShapeError

ArrayLike = Union[np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_finite(data: np.ndarray, op: str) -> None:
    if not np.isfinite(data).all():
        raise NumericalError(f"Non-finite value produced by '{op}' (shape={data.shape})")


class Tensor:
    """A node in the computation graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        parents: Tuple["Tensor", ...] = (),
        backward: Optional[BackwardFn] = None,
        op: str = "leaf",
    ):
        self.data = np.array(data, dtype=np.float64)
        _check_finite(self.data, op)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward = backward
        self.op = op

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _lift(value: Union["Tensor", ArrayLike]) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    @staticmethod
    def _result(data: np.ndarray, parents: Tuple["Tensor", ...], backward: BackwardFn, op: str) -> "Tensor":
        tracked = any(p.requires_grad for p in parents)
        return Tensor(
            data,
            requires_grad=tracked,
            parents=parents if tracked else (),
            backward=backward if tracked else None,
            op=op,
        )

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    # -- elementwise arithmetic -----------------------------------------------

    def __add__(self, other):
        other = Tensor._lift(other)
        a_shape, b_shape = self.shape, other.shape

        def backward(g):
            return _unbroadcast(g, a_shape), _unbroadcast(g, b_shape)

        return Tensor._result(self.data + other.data, (self, other), backward, "add")

    def __radd__(self, other):
        return Tensor._lift(other) + self

    def __neg__(self):
        return Tensor._result(-self.data, (self,), lambda g: (-g,), "neg")

    def __sub__(self, other):
        other = Tensor._lift(other)
        a_shape, b_shape = self.shape, other.shape

        def backward(g):
            return _unbroadcast(g, a_shape), _unbroadcast(-g, b_shape)

        return Tensor._result(self.data - other.data, (self, other), backward, "sub")

    def __rsub__(self, other):
        return Tensor._lift(other) - self

    def __mul__(self, other):
        other = Tensor._lift(other)
        a, b = self.data, other.data

        def backward(g):
            return _unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)

        return Tensor._result(a * b, (self, other), backward, "mul")

    def __rmul__(self, other):
        return Tensor._lift(other) * self

    def __truediv__(self, other):
        other = Tensor._lift(other)
        a, b = self.data, other.data
        with np.errstate(all="ignore"):
            out = a / b

        def backward(g):
            return _unbroadcast(g / b, a.shape), _unbroadcast(-g * a / (b * b), b.shape)

        return Tensor._result(out, (self, other), backward, "div")

    def __rtruediv__(self, other):
        return Tensor._lift(other) / self

    def __pow__(self, exponent: float):
        if isinstance(exponent, Tensor):
            raise TypeError("Only constant exponents are supported")
        a = self.data
        with np.errstate(all="ignore"):
            out = a ** exponent

        def backward(g):
            with np.errstate(all="ignore"):
                return (g * exponent * a ** (exponent - 1),)

        return Tensor._result(out, (self,), backward, "pow")

    # -- linear algebra ---------------------------------------------------------

    def __matmul__(self, other):
        other = Tensor._lift(other)
        a, b = self.data, other.data
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError(f"matmul shape mismatch: {a.shape} @ {b.shape}")

        def backward(g):
            return g @ b.T, a.T @ g

        return Tensor._result(a @ b, (self, other), backward, "matmul")

    def __rmatmul__(self, other):
        return Tensor._lift(other) @ self

    @property
    def T(self) -> "Tensor":
        return Tensor._result(self.data.T, (self,), lambda g: (g.T,), "transpose")

    # -- reductions -------------------------------------------------------------

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        shape = self.shape

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor._result(self.data.sum(axis=axis, keepdims=keepdims), (self,), backward, "sum")

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # -- elementwise functions --------------------------------------------------

    def exp(self) -> "Tensor":
        with np.errstate(all="ignore"):
            out = np.exp(self.data)
        return Tensor._result(out, (self,), lambda g: (g * out,), "exp")

    def log(self) -> "Tensor":
        a = self.data
        with np.errstate(all="ignore"):
            out = np.log(a)
        return Tensor._result(out, (self,), lambda g: (g / a,), "log")

    def sqrt(self) -> "Tensor":
        with np.errstate(all="ignore"):
            out = np.sqrt(self.data)

        def backward(g):
            # subgradient 0 at the origin
            positive = out > 0
            return (np.where(positive, g * 0.5 / np.where(positive, out, 1.0), 0.0),)

        return Tensor._result(out, (self,), backward, "sqrt")

    def relu(self) -> "Tensor":
        active = self.data > 0
        return Tensor._result(np.where(active, self.data, 0.0), (self,), lambda g: (g * active,), "relu")

    def clip_min(self, floor: float) -> "Tensor":
        """max(x, floor); gradient flows only where x >= floor."""
        passing = self.data >= floor
        out = np.where(passing, self.data, floor)
        return Tensor._result(out, (self,), lambda g: (g * passing,), "clip_min")

    def softmax_rows(self) -> "Tensor":
        if self.data.ndim != 2:
            raise ShapeError(f"softmax_rows expects a matrix, got shape {self.shape}")
        shifted = self.data - self.data.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        out = e / e.sum(axis=1, keepdims=True)

        def backward(g):
            return (out * (g - (g * out).sum(axis=1, keepdims=True)),)

        return Tensor._result(out, (self,), backward, "softmax")

    # -- indexing ---------------------------------------------------------------

    def take_rows(self, index: Sequence[int]) -> "Tensor":
        index = np.asarray(index, dtype=np.int64)
        shape = self.shape

        def backward(g):
            full = np.zeros(shape)
            np.add.at(full, index, g)
            return (full,)

        return Tensor._result(self.data[index], (self,), backward, "take_rows")


def concat_rows(tensors: Sequence[Tensor]) -> Tensor:
    """Stack matrices with equal column counts on top of each other."""
    tensors = [Tensor._lift(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat_rows needs at least one tensor")
    columns = {t.shape[1] for t in tensors}
    if len(columns) != 1:
        raise ShapeError(f"concat_rows column mismatch: {sorted(columns)}")
    bounds = np.cumsum([t.shape[0] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=0))

    return Tensor._result(np.concatenate([t.data for t in tensors], axis=0), tuple(tensors), backward, "concat")


def _topological_order(root: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor, params: Optional[Iterable[Tensor]] = None) -> List[np.ndarray]:
    """
    Populate `.grad` on every node reachable from `loss`.

    Parameters listed in `params` that the loss does not depend on receive an
    all-zero gradient. Returns the gradients of `params` in order.

    Raises:
        ShapeError: loss is not a scalar.
        NumericalError: a gradient became NaN/Inf.
    """
    if loss.size != 1:
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")

    order = _topological_order(loss)
    for node in order:
        node.grad = None
    loss.grad = np.ones_like(loss.data)

    for node in reversed(order):
        if node._backward is None or node.grad is None:
            continue
        parent_grads = node._backward(node.grad)
        for parent, grad in zip(node._parents, parent_grads):
            if grad is None or not parent.requires_grad:
                continue
            parent.grad = grad if parent.grad is None else parent.grad + grad

    in_graph = {id(node) for node in order}
    params = list(params) if params is not None else []
    grads = []
    for param in params:
        if param.grad is None or id(param) not in in_graph:
            param.grad = np.zeros_like(param.data)
        _check_finite(param.grad, "backward")
        grads.append(param.grad)
    return grads


__all__ = ["Tensor", "backward", "concat_rows"]
