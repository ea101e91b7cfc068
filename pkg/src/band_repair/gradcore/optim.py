"""
Decoupled-weight-decay Adam over named numpy parameters, and the cosine learning-rate schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, NumericError


@dataclass(frozen=True)
class AdamWSettings:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0


class AdamW:
    """In-place updates of a name → array dict. weight_decay=0 gives plain Adam."""

    __slots__ = ("settings", "_m", "_v", "_t")

    def __init__(self, params: dict[str, np.ndarray], settings: AdamWSettings | None = None) -> None:
        self.settings = settings or AdamWSettings()
        self._m = {k: np.zeros_like(v) for k, v in params.items()}
        self._v = {k: np.zeros_like(v) for k, v in params.items()}
        self._t = 0

    @property
    def steps(self) -> int:
        return self._t

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
        s = self.settings
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient for {name}", step=self._t)
        self._t += 1
        c1 = 1.0 - s.beta1**self._t
        c2 = 1.0 - s.beta2**self._t
        for name, p in params.items():
            g = grads.get(name)
            if g is None:
                continue
            m = self._m[name]
            v = self._v[name]
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * g * g
            if s.weight_decay:
                p -= lr * s.weight_decay * p
            p -= lr * (m / c1) / (np.sqrt(v / c2) + s.eps)

    def state(self) -> dict[str, np.ndarray]:
        out = {f"m/{k}": v.copy() for k, v in self._m.items()}
        out.update({f"v/{k}": v.copy() for k, v in self._v.items()})
        out["t"] = np.array(float(self._t))
        return out


def cosine_warmup_lr(step: int, total: int, base_lr: float, warmup_frac: float = 0.1) -> float:
    """Linear warmup over the first warmup_frac of steps, then cosine decay to zero. step is 0-based."""
    if total < 1 or base_lr < 0 or not 0.0 <= warmup_frac < 1.0:
        raise DomainError("bad learning-rate schedule settings")
    warmup = int(math.ceil(warmup_frac * total))
    if warmup and step < warmup:
        return base_lr * (step + 1) / warmup
    span = max(1, total - warmup)
    progress = min(1.0, (step - warmup) / span)
    return 0.5 * base_lr * (1.0 + math.cos(math.pi * progress))
