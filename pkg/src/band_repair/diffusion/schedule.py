"""
Linear β schedule, forward diffusion and the Tweedie clean-signal estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import DomainError, ShapeError
from ..gradcore import value

DEFAULT_T = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02


@dataclass(frozen=True)
class NoiseSchedule:
    T: int
    beta_start: float
    beta_end: float
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray

    def sqrt_ab(self, t: Any) -> Any:
        return np.sqrt(self.alpha_bar[t])

    def sqrt_one_minus_ab(self, t: Any) -> Any:
        return np.sqrt(1.0 - self.alpha_bar[t])


def make_schedule(
    T: int = DEFAULT_T, beta_start: float = DEFAULT_BETA_START, beta_end: float = DEFAULT_BETA_END
) -> NoiseSchedule:
    if T < 2:
        raise DomainError(f"T must be at least 2, got {T}")
    if not 0.0 < beta_start < beta_end < 1.0:
        raise DomainError(f"need 0 < beta_start < beta_end < 1, got {beta_start}, {beta_end}")
    beta = np.linspace(beta_start, beta_end, T)
    alpha = 1.0 - beta
    return NoiseSchedule(T, float(beta_start), float(beta_end), beta, alpha, np.cumprod(alpha))


def _coef(per_t: np.ndarray, t: Any, ndim: int) -> Any:
    """Scalar for an integer t; (N, 1, …) column for a vector of per-sample steps."""
    t_arr = np.asarray(t)
    if t_arr.ndim == 0:
        return float(per_t[int(t_arr)])
    if ndim < 1:
        raise ShapeError("per-sample timesteps need a batch axis")
    return per_t[t_arr.astype(np.int64)].reshape((-1,) + (1,) * (ndim - 1))


def _check_t(t: Any, schedule: NoiseSchedule) -> None:
    t_arr = np.asarray(t)
    if np.any(t_arr < 0) or np.any(t_arr >= schedule.T):
        raise DomainError(f"timestep outside [0, {schedule.T})")


def forward_diffuse(x0: Any, t: Any, noise: Any, schedule: NoiseSchedule) -> Any:
    """x_t = √ᾱ_t·x0 + √(1−ᾱ_t)·ε; works on arrays and tensors."""
    _check_t(t, schedule)
    if np.shape(value(x0)) != np.shape(value(noise)):
        raise ShapeError("noise must match x0")
    ndim = np.ndim(value(x0))
    a = _coef(np.sqrt(schedule.alpha_bar), t, ndim)
    b = _coef(np.sqrt(1.0 - schedule.alpha_bar), t, ndim)
    return x0 * a + noise * b


def tweedie_x0(x_t: Any, eps: Any, t: Any, schedule: NoiseSchedule) -> Any:
    """x̂0 = (x_t − √(1−ᾱ_t)·ε̂) / √ᾱ_t."""
    _check_t(t, schedule)
    ndim = np.ndim(value(x_t))
    a = _coef(np.sqrt(schedule.alpha_bar), t, ndim)
    b = _coef(np.sqrt(1.0 - schedule.alpha_bar), t, ndim)
    return (x_t - eps * b) / a
