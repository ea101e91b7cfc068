"""
Denoiser training: noise-prediction MSE plus the ᾱ_t-weighted multi-scale physical loss
on the Tweedie estimate of each sample, optimized with AdamW under a cosine warmup schedule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from tqdm import tqdm

from ..denoiser.unet import DenoiserWeights, predict_noise_batch
from ..emulator.nets import EmulatorWeights
from ..errors import ConfigError, NumericError, ShapeError, StateError
from ..gradcore import Tape, Tensor, backward, ops
from ..gradcore.optim import AdamW, AdamWSettings, cosine_warmup_lr
from ..physops.correlation import SpectralPrior, loss_pixel
from ..physops.indices import ALL_KINDS, IndexKind
from ..physops.losses import loss_image, loss_region
from ..sensorlib.library import SensorLibrary
from ..sensorlib.masking import ConditionPair, MaskMode, dsm_mask, sample_p_drop
from ..specdata.cube import HyperCube, to_physical
from .schedule import NoiseSchedule, forward_diffuse, tweedie_x0

logger = logging.getLogger(__name__)

LOSS_COLUMNS = ("l_mcd", "l_pixel", "l_region", "l_image")


@dataclass(frozen=True)
class TrainConfig:
    lambda_px: float = 1.0
    lambda_reg: float = 0.5
    lambda_img: float = 0.2
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 1e-4
    warmup_frac: float = 0.1
    batch_size: int = 4
    steps: int = 2000
    seed: int = 0
    patch_size: int = 16
    log_every: int = 100
    mask_mode: str = MaskMode.PER_BAND.value
    T: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02

    def __post_init__(self) -> None:
        for name in ("lambda_px", "lambda_reg", "lambda_img", "lr", "weight_decay"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("batch_size", "steps", "patch_size", "log_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not 0.0 <= self.warmup_frac < 1.0:
            raise ConfigError(f"warmup_frac must lie in [0, 1), got {self.warmup_frac}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError("optimizer moments must lie in [0, 1)")
        try:
            MaskMode(self.mask_mode)
        except ValueError:
            raise ConfigError(f"unknown mask_mode {self.mask_mode!r}") from None

    @property
    def optimizer_settings(self) -> AdamWSettings:
        return AdamWSettings(self.beta1, self.beta2, 1e-8, self.weight_decay)


@dataclass(frozen=True)
class PhysicsContext:
    """Fixed inputs of the physical losses during training."""

    wavelengths: np.ndarray
    prior: SpectralPrior | None = None
    emulator: EmulatorWeights | None = None
    kinds: tuple[IndexKind, ...] = ALL_KINDS


@dataclass(frozen=True)
class LossBreakdown:
    """
    Reported contributions. l_pixel, l_region and l_image are λ·mean_n(ᾱ_n·raw_n), so
    they sum with l_mcd to l_total.
    """

    l_mcd: float
    l_pixel: float
    l_region: float
    l_image: float
    l_total: float

    def as_dict(self) -> dict[str, float]:
        return {
            "l_mcd": self.l_mcd,
            "l_pixel": self.l_pixel,
            "l_region": self.l_region,
            "l_image": self.l_image,
            "l_total": self.l_total,
        }


@dataclass(frozen=True)
class StepRecord:
    step: int
    losses: LossBreakdown
    lr: float

    def as_row(self) -> list[float | int]:
        b = self.losses
        return [self.step, b.l_mcd, b.l_pixel, b.l_region, b.l_image, self.lr, b.l_total]


def _check_context(cfg: TrainConfig, ctx: PhysicsContext) -> None:
    if cfg.lambda_px > 0 and ctx.prior is None:
        raise StateError("lambda_px > 0 needs a spectral prior")
    if cfg.lambda_img > 0:
        if ctx.emulator is None:
            raise StateError("lambda_img > 0 needs a trained emulator")
        ctx.emulator.require_trained()


def _weighted_mean(parts: Sequence[Tensor], weights: np.ndarray) -> Tensor:
    total = parts[0] * float(weights[0])
    for p, w in zip(parts[1:], weights[1:]):
        total = total + p * float(w)
    return total * (1.0 / len(parts))


def compute_losses(
    x0: np.ndarray,
    pairs: Sequence[ConditionPair],
    ts: np.ndarray,
    noise: np.ndarray,
    weights: DenoiserWeights,
    schedule: NoiseSchedule,
    cfg: TrainConfig,
    ctx: PhysicsContext,
    params: Mapping[str, Any] | None = None,
) -> tuple[Tensor, LossBreakdown]:
    """
    Total loss for a fixed batch: x0 is N×H×W×B normalized, with one pair, timestep and
    noise sample per element. Pass taped params to differentiate.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.int64).reshape(-1)
    if x0.ndim != 4 or len(pairs) != x0.shape[0] or ts.shape[0] != x0.shape[0]:
        raise ShapeError(f"batch {x0.shape} needs one pair and timestep per sample")
    _check_context(cfg, ctx)
    p = weights.params if params is None else params

    c = np.stack([pair.c for pair in pairs])
    m = np.stack([pair.m for pair in pairs])
    x_t = forward_diffuse(x0, ts, noise, schedule)
    eps_hat = predict_noise_batch(x_t, ts, c, m, p, weights.config)
    diff = eps_hat - noise
    l_mcd = ops.mean(diff * diff)
    total = l_mcd
    report = {"l_mcd": l_mcd.item(), "l_pixel": 0.0, "l_region": 0.0, "l_image": 0.0}

    if cfg.lambda_px > 0 or cfg.lambda_reg > 0 or cfg.lambda_img > 0:
        ab = schedule.alpha_bar[ts]
        x_hat = tweedie_x0(x_t, eps_hat, ts, schedule)
        real = to_physical(x0)
        gen = [to_physical(x_hat[n]) for n in range(x0.shape[0])]
        gen_clipped = [ops.clip(g, 0.0, 1.0) for g in gen]
        terms = []
        if cfg.lambda_px > 0:
            raw = [loss_pixel(g, ctx.prior) for g in gen]
            terms.append(("l_pixel", cfg.lambda_px, _weighted_mean(raw, ab)))
        if cfg.lambda_reg > 0:
            raw = [
                loss_region(real[n], g, ctx.kinds, ctx.wavelengths)
                for n, g in enumerate(gen_clipped)
            ]
            terms.append(("l_region", cfg.lambda_reg, _weighted_mean(raw, ab)))
        if cfg.lambda_img > 0:
            raw = [loss_image(g, real[n], ctx.emulator) for n, g in enumerate(gen_clipped)]
            terms.append(("l_image", cfg.lambda_img, _weighted_mean(raw, ab)))
        for name, lam, weighted in terms:
            report[name] = lam * weighted.item()
            total = total + weighted * lam

    return total, LossBreakdown(
        report["l_mcd"], report["l_pixel"], report["l_region"], report["l_image"], total.item()
    )


def train_step(
    x0: np.ndarray,
    pairs: Sequence[ConditionPair],
    weights: DenoiserWeights,
    schedule: NoiseSchedule,
    cfg: TrainConfig,
    ctx: PhysicsContext,
    optimizer: AdamW,
    step: int,
    rng: np.random.Generator,
) -> tuple[StepRecord, DenoiserWeights]:
    """Draw t and ε, differentiate the total loss and apply one AdamW update in place."""
    n = x0.shape[0]
    ts = rng.integers(0, schedule.T, size=n)
    noise = rng.standard_normal(x0.shape)
    tape = Tape()
    params = weights.bind(tape)
    try:
        total, breakdown = compute_losses(x0, pairs, ts, noise, weights, schedule, cfg, ctx, params)
    except NumericError as exc:
        raise NumericError(exc.message, op=exc.op, step=step) from exc
    if not np.isfinite(breakdown.l_total):
        raise NumericError("training loss is not finite", step=step)
    grads = backward(tape, total)
    lr = cosine_warmup_lr(step, cfg.steps, cfg.lr, cfg.warmup_frac)
    try:
        optimizer.step(weights.params, {k: grads[t.id].data for k, t in params.items()}, lr)
    except NumericError as exc:
        raise NumericError(exc.message, step=step) from exc
    return StepRecord(step, breakdown, lr), weights


@dataclass
class Trainer:
    """Owns the weights, optimizer moments, schedule and RNG of one training run."""

    weights: DenoiserWeights
    schedule: NoiseSchedule
    cfg: TrainConfig
    ctx: PhysicsContext
    library: SensorLibrary
    patches: list[HyperCube]
    history: list[StepRecord] = field(default_factory=list)
    last_good_step: int = -1

    def __post_init__(self) -> None:
        if not self.patches:
            raise ShapeError("no training patches")
        _check_context(self.cfg, self.ctx)
        self.optimizer = AdamW(self.weights.params, self.cfg.optimizer_settings)
        self.rng = np.random.default_rng(self.cfg.seed)

    def sample_batch(self) -> tuple[np.ndarray, list[ConditionPair]]:
        idx = self.rng.integers(0, len(self.patches), size=self.cfg.batch_size)
        chosen = [self.patches[i] for i in idx]
        pairs = [
            dsm_mask(p, self.library, sample_p_drop(self.rng), self.cfg.mask_mode, self.rng)
            for p in chosen
        ]
        return np.stack([p.data for p in chosen]), pairs

    def run(
        self, progress: bool = False, on_step: Callable[[StepRecord], None] | None = None
    ) -> list[StepRecord]:
        start = len(self.history)
        for step in tqdm(range(start, self.cfg.steps), desc="train", disable=not progress):
            x0, pairs = self.sample_batch()
            try:
                record, _ = train_step(
                    x0, pairs, self.weights, self.schedule, self.cfg, self.ctx, self.optimizer, step, self.rng
                )
            except NumericError:
                logger.error("training diverged at step %d (last good step %d)", step, self.last_good_step)
                raise
            self.history.append(record)
            self.last_good_step = step
            if on_step is not None:
                on_step(record)
            if step % self.cfg.log_every == 0 or step == self.cfg.steps - 1:
                logger.info(
                    "step %d l_mcd %.5f l_total %.5f lr %.2e", step, record.losses.l_mcd, record.losses.l_total, record.lr
                )
        return self.history
