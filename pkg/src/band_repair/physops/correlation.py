"""
Band-to-band Pearson correlation over the spatial axes, and the spectral prior S.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import DomainError, ShapeError
from ..gradcore import Tensor, as_tensor, ops

VAR_GUARD = 1e-8


@dataclass(frozen=True)
class SpectralPrior:
    s: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.s, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ShapeError(f"prior must be square, got {s.shape}")
        if not np.allclose(s, s.T, rtol=0, atol=1e-9):
            raise DomainError("prior must be symmetric")
        if not np.allclose(np.diag(s), 1.0, rtol=0, atol=1e-9):
            raise DomainError("prior must have a unit diagonal")
        if np.any(np.abs(s) > 1.0 + 1e-9):
            raise DomainError("prior entries must lie in [-1, 1]")
        object.__setattr__(self, "s", s)

    @property
    def bands(self) -> int:
        return self.s.shape[0]

    @classmethod
    def identity(cls, bands: int) -> SpectralPrior:
        return cls(np.eye(bands))


def corr_matrix(x: Any) -> Tensor:
    """
    Differentiable B×B correlation of x (…×B, at least two samples).
    r_ij = mean(d_i d_j) / sqrt((var_i + 1e-8)(var_j + 1e-8)).
    """
    t = as_tensor(x)
    bands = t.shape[-1]
    n = t.size // bands if bands else 0
    if n < 2:
        raise ShapeError(f"correlation needs at least two samples, got {n}")
    flat = ops.reshape(t, (n, bands))
    centered = flat - ops.mean(flat, axis=0, keepdims=True)
    cov = ops.matmul(ops.transpose(centered), centered) * (1.0 / n)
    var = ops.mean(centered * centered, axis=0)
    guarded = var + VAR_GUARD
    denom = ops.sqrt(ops.reshape(guarded, (bands, 1)) * ops.reshape(guarded, (1, bands)))
    return cov / denom


def corr_report(x: Any) -> np.ndarray:
    """Reported correlation: symmetrised, clipped to [-1, 1], unit diagonal."""
    r = corr_matrix(x).data
    r = 0.5 * (r + r.T)
    r = np.clip(r, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r


def loss_pixel(x: Any, prior: SpectralPrior) -> Tensor:
    """Squared Frobenius distance between corr(x) and S."""
    c = corr_matrix(x)
    if c.shape != prior.s.shape:
        raise ShapeError(f"correlation {c.shape} does not match prior {prior.s.shape}")
    diff = c - prior.s
    return ops.sum(diff * diff)
