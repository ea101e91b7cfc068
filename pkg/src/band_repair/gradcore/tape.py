"""
Tensors and the Wengert tape that records every forward op for reverse-mode differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..errors import ShapeError


@dataclass(frozen=True)
class Node:
    """One recorded op: kind, input ids, output id and whatever backward needs."""

    kind: str
    inputs: tuple[int, ...]
    output: int
    saved: dict[str, Any] = field(default_factory=dict)


class Tensor:
    """
    Dense float64 array bound to a tape. Tensors with tape=None are detached values
    (gradients returned by backward, or plain results).
    """

    __slots__ = ("tape", "id", "data", "requires_grad")

    # Make numpy defer to Tensor's reflected operators (ndarray * Tensor).
    __array_priority__ = 1000

    def __init__(self, data: Any, *, tape: Tape | None = None, id: int = -1, requires_grad: bool = False) -> None:
        self.data = np.asarray(data, dtype=np.float64)
        self.tape = tape
        self.id = id
        self.requires_grad = requires_grad

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def __repr__(self) -> str:
        return f"Tensor(id={self.id}, shape={self.shape}, requires_grad={self.requires_grad})"

    # Operators route through gradcore.ops.forward.
    def __add__(self, other: Any) -> Tensor:
        return _fwd("add", self, other)

    def __radd__(self, other: Any) -> Tensor:
        return _fwd("add", other, self)

    def __sub__(self, other: Any) -> Tensor:
        return _fwd("sub", self, other)

    def __rsub__(self, other: Any) -> Tensor:
        return _fwd("sub", other, self)

    def __mul__(self, other: Any) -> Tensor:
        return _fwd("mul", self, other)

    def __rmul__(self, other: Any) -> Tensor:
        return _fwd("mul", other, self)

    def __truediv__(self, other: Any) -> Tensor:
        return _fwd("div", self, other)

    def __rtruediv__(self, other: Any) -> Tensor:
        return _fwd("div", other, self)

    def __neg__(self) -> Tensor:
        return _fwd("neg", self)

    def __pow__(self, exponent: float) -> Tensor:
        return _fwd("power", self, exponent=float(exponent))

    def __matmul__(self, other: Any) -> Tensor:
        return _fwd("matmul", self, other)

    def __rmatmul__(self, other: Any) -> Tensor:
        return _fwd("matmul", other, self)

    def sum(self, axis: int | Sequence[int] | None = None, keepdims: bool = False) -> Tensor:
        return _fwd("sum", self, axis=_axes(axis), keepdims=keepdims)

    def mean(self, axis: int | Sequence[int] | None = None, keepdims: bool = False) -> Tensor:
        return _fwd("mean", self, axis=_axes(axis), keepdims=keepdims)

    def reshape(self, *shape: int) -> Tensor:
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return _fwd("reshape", self, shape=tuple(int(s) for s in shape))

    def transpose(self, *axes: int) -> Tensor:
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return _fwd("transpose", self, axes=tuple(axes) if axes else None)

    @property
    def T(self) -> Tensor:
        return self.transpose()

    def __getitem__(self, index: Any) -> Tensor:
        return _fwd("slice", self, index=index)


def _axes(axis: int | Sequence[int] | None) -> tuple[int, ...] | None:
    if axis is None:
        return None
    if isinstance(axis, int):
        return (axis,)
    return tuple(int(a) for a in axis)


def _fwd(kind: str, *inputs: Any, **attrs: Any) -> Tensor:
    from .ops import forward

    return forward(kind, *inputs, **attrs)


class Tape:
    """
    Ordered record of forward ops. Ids are assigned once, in creation order, so every
    input id precedes the node that consumes it.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._tensors: dict[int, Tensor] = {}
        self._next_id = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def _register(self, data: np.ndarray, requires_grad: bool) -> Tensor:
        t = Tensor(data, tape=self, id=self._next_id, requires_grad=requires_grad)
        self._tensors[t.id] = t
        self._next_id += 1
        return t

    def leaf(self, data: Any, requires_grad: bool = True) -> Tensor:
        """New input tensor. Data is copied so later in-place edits cannot leak in."""
        return self._register(np.array(data, dtype=np.float64), requires_grad)

    def constant(self, data: Any) -> Tensor:
        return self.leaf(data, requires_grad=False)

    def tensor(self, tensor_id: int) -> Tensor:
        return self._tensors[tensor_id]

    def grad_leaves(self) -> list[Tensor]:
        """Leaves that require gradients (tensors not produced by any node)."""
        produced = {n.output for n in self.nodes}
        return [t for tid, t in self._tensors.items() if t.requires_grad and tid not in produced]

    def record(self, kind: str, inputs: Sequence[Tensor], data: np.ndarray, saved: dict[str, Any]) -> Tensor:
        out = self._register(data, any(t.requires_grad for t in inputs))
        self.nodes.append(Node(kind, tuple(t.id for t in inputs), out.id, saved))
        return out


def backward(tape: Tape, loss: Tensor) -> dict[int, Tensor]:
    """
    Reverse sweep from a scalar loss. Returns ∂loss/∂leaf for every requires_grad leaf
    on the tape, keyed by tensor id; leaves the loss does not depend on get zeros.
    """
    from .ops import RULES

    if loss.tape is not tape:
        raise ShapeError("loss was not produced on this tape")
    if loss.shape != ():
        raise ShapeError(f"loss must be a scalar, got shape {loss.shape}")

    grads: dict[int, np.ndarray] = {loss.id: np.ones((), dtype=np.float64)}
    for node in reversed(tape.nodes):
        g_out = grads.get(node.output)
        if g_out is None:
            continue
        in_tensors = [tape.tensor(i) for i in node.inputs]
        if not any(t.requires_grad for t in in_tensors):
            continue
        out = tape.tensor(node.output)
        in_grads = RULES[node.kind].backward(g_out, [t.data for t in in_tensors], out.data, node.saved)
        for t, g in zip(in_tensors, in_grads):
            if g is None or not t.requires_grad:
                continue
            if t.id in grads:
                grads[t.id] = grads[t.id] + g
            else:
                grads[t.id] = g

    out_map: dict[int, Tensor] = {}
    for leaf in tape.grad_leaves():
        g = grads.get(leaf.id)
        if g is None:
            g = np.zeros_like(leaf.data)
        out_map[leaf.id] = Tensor(np.broadcast_to(g, leaf.shape).copy())
    return out_map
