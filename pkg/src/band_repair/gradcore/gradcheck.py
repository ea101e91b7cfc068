"""Central-difference gradient checking for functions built on a tape."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import NumericError
from .tape import Tape, Tensor, backward


def analytic_grad(f: Callable[[Tensor], Tensor], x: np.ndarray) -> np.ndarray:
    """∂f/∂x at x through a fresh tape."""
    tape = Tape()
    leaf = tape.leaf(x)
    loss = f(leaf)
    return backward(tape, loss)[leaf.id].data


def _value(f: Callable[[Tensor], Tensor], x: np.ndarray) -> float:
    tape = Tape()
    out = f(tape.leaf(x)).item()
    if not np.isfinite(out):
        raise NumericError("function value is not finite", op="grad_check")
    return out


def numeric_grad(f: Callable[[Tensor], Tensor], x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = _value(f, x)
        flat[i] = orig - step
        down = _value(f, x)
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * step)
    return grad


def grad_check(f: Callable[[Tensor], Tensor], x: Tensor | np.ndarray, step: float = 1e-5, floor: float = 1e-12) -> float:
    """
    Max over elements of |analytic - central difference| / max(floor, |central difference|).

    f receives a leaf tensor on a fresh tape and must return a scalar on that tape.
    """
    data = x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
    analytic = analytic_grad(f, data)
    numeric = numeric_grad(f, data, step)
    if analytic.size == 0:
        return 0.0
    err = np.abs(analytic - numeric) / np.maximum(floor, np.abs(numeric))
    return float(err.max())
