"""
Physics-guided noise correction: ε̃ = ε̂ − s·√(1−ᾱ_t)·g_t with g_t = ∇_{x_t} loss_phy(x̂0).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from ..errors import ConfigError, NumericError, StateError
from ..gradcore import Tape, Tensor, backward
from ..physops.target import PhysTarget, PhysWeights, loss_phy
from .schedule import NoiseSchedule, tweedie_x0

NoisePredictor = Callable[[Tensor], Tensor]


class GradientRoute(str, Enum):
    # ε̂ held constant: g flows through the Tweedie estimate only
    TWEEDIE = "tweedie"
    # g also flows back through the noise predictor
    FULL = "full"


@dataclass(frozen=True)
class GuidanceConfig:
    s: float = 1.0
    route: str = GradientRoute.TWEEDIE.value
    w_index: float = 1.0
    w_prior: float = 1.0
    w_bounds: float = 1.0
    w_rtm: float = 0.0

    def __post_init__(self) -> None:
        if self.s < 0:
            raise ConfigError(f"guidance scale s must be non-negative, got {self.s}")
        try:
            GradientRoute(self.route)
        except ValueError:
            raise ConfigError(f"unknown gradient route {self.route!r}") from None
        PhysWeights(self.w_index, self.w_prior, self.w_bounds, self.w_rtm)

    @property
    def phys_weights(self) -> PhysWeights:
        return PhysWeights(self.w_index, self.w_prior, self.w_bounds, self.w_rtm)

    @property
    def gradient_route(self) -> GradientRoute:
        return GradientRoute(self.route)


def phys_gradient(
    x_t: np.ndarray,
    eps_hat: np.ndarray,
    t: int,
    target: PhysTarget,
    schedule: NoiseSchedule,
    guidance: GuidanceConfig,
    predictor: NoisePredictor | None = None,
) -> tuple[np.ndarray, float]:
    """(g_t, loss_phy value) at x_t."""
    tape = Tape()
    x = tape.leaf(x_t)
    if guidance.gradient_route is GradientRoute.FULL:
        if predictor is None:
            raise StateError("full gradient route needs the noise predictor")
        eps = predictor(x)
    else:
        eps = eps_hat
    loss = loss_phy(tweedie_x0(x, eps, t, schedule), target, guidance.phys_weights)
    g = backward(tape, loss)[x.id].data
    if not np.all(np.isfinite(g)):
        raise NumericError("guidance gradient is not finite", step=int(t))
    return g, loss.item()


def pgs_inject(
    eps_hat: np.ndarray,
    x_t: np.ndarray,
    t: int,
    target: PhysTarget | None,
    schedule: NoiseSchedule,
    guidance: GuidanceConfig,
    predictor: NoisePredictor | None = None,
) -> np.ndarray:
    """Corrected noise estimate. s = 0 returns eps_hat itself."""
    if guidance.s == 0:
        return eps_hat
    if target is None:
        raise StateError("guidance needs a physical target")
    g, _ = phys_gradient(x_t, eps_hat, t, target, schedule, guidance, predictor)
    return eps_hat - guidance.s * float(schedule.sqrt_one_minus_ab(t)) * g
