"""
Noise schedule, training, physics-guided DDIM sampling and checkpoints.
"""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .guidance import GradientRoute, GuidanceConfig, pgs_inject, phys_gradient
from .sampler import ddim_sample, ddim_timesteps
from .schedule import NoiseSchedule, forward_diffuse, make_schedule, tweedie_x0
from .training import (
    LossBreakdown,
    PhysicsContext,
    StepRecord,
    TrainConfig,
    Trainer,
    compute_losses,
    train_step,
)

__all__ = [
    "Checkpoint",
    "GradientRoute",
    "GuidanceConfig",
    "LossBreakdown",
    "NoiseSchedule",
    "PhysicsContext",
    "StepRecord",
    "TrainConfig",
    "Trainer",
    "compute_losses",
    "ddim_sample",
    "ddim_timesteps",
    "forward_diffuse",
    "load_checkpoint",
    "make_schedule",
    "pgs_inject",
    "phys_gradient",
    "save_checkpoint",
    "train_step",
    "tweedie_x0",
]
