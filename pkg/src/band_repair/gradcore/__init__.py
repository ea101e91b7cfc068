"""
Dense float64 tensors with a reverse-mode tape.
"""

from . import ops
from .gradcheck import analytic_grad, grad_check, numeric_grad
from .ops import RULES, as_tensor, forward, value
from .tape import Node, Tape, Tensor, backward

__all__ = [
    "Node",
    "RULES",
    "Tape",
    "Tensor",
    "analytic_grad",
    "as_tensor",
    "backward",
    "forward",
    "grad_check",
    "numeric_grad",
    "ops",
    "value",
]
