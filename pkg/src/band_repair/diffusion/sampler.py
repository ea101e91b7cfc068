"""
Deterministic DDIM (η = 0) with optional physics guidance at every step.
"""

from __future__ import annotations

import logging

import numpy as np
from tqdm import tqdm

from ..denoiser.unet import DenoiserWeights, predict_noise
from ..errors import DomainError
from ..gradcore import Tensor
from ..physops.target import PhysTarget
from ..sensorlib.masking import ConditionPair
from .guidance import GradientRoute, GuidanceConfig, pgs_inject
from .schedule import NoiseSchedule, tweedie_x0

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 50


def ddim_timesteps(T: int, steps: int) -> np.ndarray:
    """Descending uniform subsequence of [0, T); includes T−1 and, for steps ≥ 2, 0."""
    if not 1 <= steps <= T:
        raise DomainError(f"steps must lie in [1, {T}], got {steps}")
    if steps == 1:
        return np.array([T - 1])
    ts = np.round(np.linspace(0, T - 1, steps)).astype(np.int64)
    return ts[::-1].copy()


def ddim_sample(
    pair: ConditionPair,
    weights: DenoiserWeights,
    schedule: NoiseSchedule,
    steps: int = DEFAULT_STEPS,
    guidance: GuidanceConfig | None = None,
    seed: int = 0,
    target: PhysTarget | None = None,
    progress: bool = False,
) -> np.ndarray:
    """
    Normalized H×W×B repair of `pair`. Each step moves to
    √ᾱ_prev·x̂0(ε̂) + √(1−ᾱ_prev)·ε̃; the result is the last Tweedie estimate clamped to [−1, 1].
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(pair.shape)
    ts = ddim_timesteps(schedule.T, steps)
    x0 = x
    for i, t in enumerate(tqdm(ts, desc="ddim", disable=not progress)):
        t = int(t)
        eps = predict_noise(x, t, pair, weights).data
        x0 = tweedie_x0(x, eps, t, schedule)
        if i == len(ts) - 1:
            break
        eps_guided = eps
        if guidance is not None:
            predictor = None
            if guidance.gradient_route is GradientRoute.FULL:
                predictor = _predictor(pair, weights, t)
            eps_guided = pgs_inject(eps, x, t, target, schedule, guidance, predictor)
        t_prev = int(ts[i + 1])
        x = schedule.sqrt_ab(t_prev) * x0 + schedule.sqrt_one_minus_ab(t_prev) * eps_guided
    return np.clip(x0, -1.0, 1.0)


def _predictor(pair: ConditionPair, weights: DenoiserWeights, t: int):
    def predict(x: Tensor) -> Tensor:
        return predict_noise(x, t, pair, weights)

    return predict
