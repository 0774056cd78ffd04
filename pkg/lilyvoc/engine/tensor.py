"""Reverse-mode differentiation on top of numpy arrays.

Every op records its parents and a closure mapping the output cotangent to
one cotangent per parent. The graph is rebuilt on every forward pass and
consumed by `backward`.
"""

from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from lilyvoc.error import DimensionError, GraphError, NumericalError

type Array = NDArray[np.float64]
type BackwardFn = Callable[[Array], Sequence[Array | None]]

_grad_enabled: ContextVar[bool] = ContextVar("grad_enabled", default=True)
_anomaly_check: ContextVar[bool] = ContextVar("anomaly_check", default=False)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording inside the block."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


@contextmanager
def detect_anomaly() -> Iterator[None]:
    """Raise NumericalError as soon as an op produces NaN or Inf."""
    token = _anomaly_check.set(True)
    try:
        yield
    finally:
        _anomaly_check.reset(token)


def is_grad_enabled() -> bool:
    return _grad_enabled.get()


def _as_array(value: ArrayLike) -> Array:
    return np.asarray(value, dtype=np.float64)


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    # Sum out the axes numpy broadcast over.
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    data: Array
    requires_grad: bool
    grad: Array | None
    op: str
    _parents: tuple["Tensor", ...]
    _backward: BackwardFn | None
    _consumed: bool

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        op: str = "leaf",
    ) -> None:
        self.data = _as_array(data)
        self.requires_grad = requires_grad
        self.grad = None
        self.op = op
        self._parents = ()
        self._backward = None
        self._consumed = False

    @staticmethod
    def _make(
        data: Array,
        parents: Sequence["Tensor"],
        backward: BackwardFn,
        op: str,
    ) -> "Tensor":
        if _anomaly_check.get() and not np.all(np.isfinite(data)):
            raise NumericalError(f"Op '{op}' produced a non-finite value.")
        needs_grad = _grad_enabled.get() and any(p.requires_grad for p in parents)
        out = Tensor(data, requires_grad=needs_grad, op=op)
        if needs_grad:
            out._parents = tuple(parents)
            out._backward = backward
        return out

    # Properties.

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def numpy(self) -> Array:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs one element, got shape {self.shape}.")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op}, grad={self.requires_grad})"

    def __len__(self) -> int:
        return self.shape[0]

    # Arithmetic.

    def __add__(self, other: "Tensor | ArrayLike") -> "Tensor":
        other = as_tensor(other)
        a_shape, b_shape = self.shape, other.shape
        return Tensor._make(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape)),
            "add",
        )

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other) + self

    def __neg__(self) -> "Tensor":
        return Tensor._make(-self.data, (self,), lambda g: (-g,), "neg")

    def __sub__(self, other: "Tensor | ArrayLike") -> "Tensor":
        other = as_tensor(other)
        a_shape, b_shape = self.shape, other.shape
        return Tensor._make(
            self.data - other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(-g, b_shape)),
            "sub",
        )

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other) - self

    def __mul__(self, other: "Tensor | ArrayLike") -> "Tensor":
        other = as_tensor(other)
        a, b = self.data, other.data
        return Tensor._make(
            a * b,
            (self, other),
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)),
            "mul",
        )

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other) * self

    def __truediv__(self, other: "Tensor | ArrayLike") -> "Tensor":
        other = as_tensor(other)
        a, b = self.data, other.data
        out = a / b
        return Tensor._make(
            out,
            (self, other),
            lambda g: (
                _unbroadcast(g / b, a.shape),
                _unbroadcast(-g * out / b, b.shape),
            ),
            "div",
        )

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other) / self

    def __pow__(self, exponent: float) -> "Tensor":
        a = self.data
        return Tensor._make(
            a**exponent,
            (self,),
            lambda g: (g * exponent * a ** (exponent - 1),),
            "pow",
        )

    def __matmul__(self, other: "Tensor") -> "Tensor":
        a, b = self.data, other.data
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DimensionError(
                f"Cannot multiply shapes {self.shape} and {other.shape}."
            )
        return Tensor._make(
            a @ b, (self, other), lambda g: (g @ b.T, a.T @ g), "matmul"
        )

    # Reductions and shape ops.

    def sum(
        self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False
    ) -> "Tensor":
        shape = self.shape

        def backward(g: Array) -> tuple[Array]:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor._make(
            np.sum(self.data, axis=axis, keepdims=keepdims), (self,), backward, "sum"
        )

    def mean(
        self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False
    ) -> "Tensor":
        count = self.data.size / np.sum(self.data, axis=axis, keepdims=keepdims).size
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape: int) -> "Tensor":
        source = self.shape
        return Tensor._make(
            self.data.reshape(shape),
            (self,),
            lambda g: (g.reshape(source),),
            "reshape",
        )

    def transpose(self, *axes: int) -> "Tensor":
        order = axes or tuple(reversed(range(self.ndim)))
        inverse = tuple(np.argsort(order))
        return Tensor._make(
            np.transpose(self.data, order),
            (self,),
            lambda g: (np.transpose(g, inverse),),
            "transpose",
        )

    def __getitem__(self, index: Any) -> "Tensor":
        shape = self.shape

        def backward(g: Array) -> tuple[Array]:
            grad = np.zeros(shape)
            np.add.at(grad, index, g)
            return (grad,)

        return Tensor._make(self.data[index], (self,), backward, "index")

    # Elementwise functions.

    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return Tensor._make(out, (self,), lambda g: (g * out,), "exp")

    def log(self) -> "Tensor":
        a = self.data
        return Tensor._make(np.log(a), (self,), lambda g: (g / a,), "log")

    def sin(self) -> "Tensor":
        a = self.data
        return Tensor._make(np.sin(a), (self,), lambda g: (g * np.cos(a),), "sin")

    def sqrt(self) -> "Tensor":
        out = np.sqrt(self.data)
        return Tensor._make(out, (self,), lambda g: (g * 0.5 / out,), "sqrt")

    def abs(self) -> "Tensor":
        a = self.data
        return Tensor._make(np.abs(a), (self,), lambda g: (g * np.sign(a),), "abs")

    def maximum(self, floor: float) -> "Tensor":
        a = self.data
        return Tensor._make(
            np.maximum(a, floor), (self,), lambda g: (g * (a > floor),), "maximum"
        )

    def backward(self) -> dict[int, Array]:
        return backward(self)


def as_tensor(value: "Tensor | ArrayLike") -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward(g: Array) -> list[Array]:
        return list(np.split(g, bounds, axis=axis))

    return Tensor._make(
        np.concatenate([t.data for t in tensors], axis=axis),
        tensors,
        backward,
        "concat",
    )


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    return concat([t.reshape(*_expand_shape(t.shape, axis)) for t in tensors], axis)


def _expand_shape(shape: tuple[int, ...], axis: int) -> tuple[int, ...]:
    axis = axis if axis >= 0 else len(shape) + 1 + axis
    return (*shape[:axis], 1, *shape[axis:])


def pad(
    x: Tensor, widths: Sequence[tuple[int, int]], mode: str = "constant"
) -> Tensor:
    """Zero (`constant`) or `reflect` padding along every axis."""
    width_list = [tuple(w) for w in widths]
    if mode == "constant":
        crop = tuple(
            slice(before, before + size)
            for (before, _), size in zip(width_list, x.shape, strict=True)
        )
        return Tensor._make(
            np.pad(x.data, width_list), (x,), lambda g: (g[crop],), "pad"
        )
    if mode != "reflect":
        raise ValueError(f"Unsupported padding mode '{mode}'.")
    # Reflect padding as a gather so backward folds the mirrored cotangents.
    index = np.ix_(
        *[
            np.pad(np.arange(size), width, mode="reflect")
            for width, size in zip(width_list, x.shape, strict=True)
        ]
    )
    return x[index]


def where(mask: NDArray[np.bool_], a: Tensor, b: Tensor | float) -> Tensor:
    b = as_tensor(b)
    a_shape, b_shape = a.shape, b.shape
    return Tensor._make(
        np.where(mask, a.data, b.data),
        (a, b),
        lambda g: (
            _unbroadcast(np.where(mask, g, 0.0), a_shape),
            _unbroadcast(np.where(mask, 0.0, g), b_shape),
        ),
        "where",
    )


@dataclass
class Node:
    op: str
    tensor: Tensor
    inputs: list[int] = field(default_factory=list)


@dataclass
class Graph:
    """Topologically ordered view of the ops reachable from one output."""

    nodes: list[Node]
    outputs: list[int]

    @classmethod
    def trace(cls, output: Tensor) -> "Graph":
        order: list[Tensor] = []
        ids: dict[int, int] = {}
        stack: list[tuple[Tensor, bool]] = [(output, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                if id(tensor) not in ids:
                    ids[id(tensor)] = len(order)
                    order.append(tensor)
                continue
            if id(tensor) in ids:
                continue
            stack.append((tensor, True))
            for parent in tensor._parents:
                if id(parent) not in ids:
                    stack.append((parent, False))
        nodes = [
            Node(t.op, t, [ids[id(p)] for p in t._parents]) for t in order
        ]
        return cls(nodes=nodes, outputs=[ids[id(output)]])


def backward(loss: Tensor) -> dict[int, Array]:
    """Populate `grad` on every tensor that requires it.

    Returns the cotangent of each graph node keyed by node index.
    """
    if loss.size != 1:
        raise GraphError(f"backward() needs a scalar loss, got shape {loss.shape}.")
    if loss._consumed:
        raise GraphError("Graph was already consumed by backward(); rerun forward.")
    if not loss.requires_grad:
        raise GraphError("Loss does not depend on any tensor that requires grad.")

    graph = Graph.trace(loss)
    if any(node.tensor._consumed for node in graph.nodes):
        raise GraphError("Graph shares ops with a consumed graph; rerun forward.")
    cotangents: dict[int, Array] = {graph.outputs[0]: np.ones_like(loss.data)}
    for index in reversed(range(len(graph.nodes))):
        node = graph.nodes[index]
        grad = cotangents.get(index)
        tensor = node.tensor
        if grad is None or not tensor.requires_grad:
            continue
        tensor.grad = grad if tensor.grad is None else tensor.grad + grad
        if tensor._backward is None:
            continue
        parent_grads = tensor._backward(grad)
        for parent_index, parent_grad in zip(node.inputs, parent_grads, strict=True):
            if parent_grad is None:
                continue
            previous = cotangents.get(parent_index)
            cotangents[parent_index] = (
                parent_grad if previous is None else previous + parent_grad
            )
        # Interior nodes release their closures once visited.
        tensor._backward = None
        tensor._parents = ()
        tensor._consumed = True
    loss._consumed = True
    return cotangents
