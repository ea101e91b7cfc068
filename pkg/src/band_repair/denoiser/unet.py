"""
Noise-prediction network ε_θ(x_t, t, C, M).

A micro U-Net over NHWC tensors. The input conv sees x_t, C and M stacked along
channels; the condition encoder pools C and M into a global vector h that modulates
every normalization through CAM; the time embedding is added inside each residual block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from ..errors import ShapeError
from ..gradcore import Tape, Tensor, as_tensor, ops
from ..sensorlib.masking import ConditionPair
from .config import RES_BLOCKS_PER_LEVEL, DenoiserConfig
from .layers import conv, linear, res_block, time_embed_batch

_OUT_INIT_SCALE = 0.1


@dataclass
class DenoiserWeights:
    config: DenoiserConfig
    params: dict[str, np.ndarray]

    def bind(self, tape: Tape, trainable: bool = True) -> dict[str, Tensor]:
        return {k: tape.leaf(v, requires_grad=trainable) for k, v in self.params.items()}

    def copy(self) -> DenoiserWeights:
        return DenoiserWeights(self.config, {k: v.copy() for k, v in self.params.items()})

    def parameter_count(self) -> int:
        return int(sum(v.size for v in self.params.values()))


class _Init:
    __slots__ = ("rng", "params")

    def __init__(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)
        self.params: dict[str, np.ndarray] = {}

    def conv(self, name: str, cin: int, cout: int, scale: float = 1.0) -> None:
        self.params[f"{name}/W"] = self.rng.normal(scale=scale * np.sqrt(1.0 / (9 * cin)), size=(3, 3, cin, cout))
        self.params[f"{name}/b"] = np.zeros((1, 1, 1, cout))

    def linear(self, name: str, fan_in: int, fan_out: int, zero: bool = False) -> None:
        if zero:
            self.params[f"{name}/W"] = np.zeros((fan_in, fan_out))
        else:
            self.params[f"{name}/W"] = self.rng.normal(scale=np.sqrt(1.0 / fan_in), size=(fan_in, fan_out))
        self.params[f"{name}/b"] = np.zeros((1, fan_out))

    def block(self, prefix: str, cin: int, cout: int, cfg: DenoiserConfig) -> None:
        self.linear(f"{prefix}/cam1", cfg.h_dim, 2 * cin, zero=True)
        self.conv(f"{prefix}/conv1", cin, cout)
        self.linear(f"{prefix}/time", cfg.time_dim, cout)
        self.linear(f"{prefix}/cam2", cfg.h_dim, 2 * cout, zero=True)
        self.conv(f"{prefix}/conv2", cout, cout)
        if cin != cout:
            self.params[f"{prefix}/skip/W"] = self.rng.normal(scale=np.sqrt(1.0 / cin), size=(cin, cout))


def _block_plan(cfg: DenoiserConfig) -> list[tuple[str, int, int]]:
    """(prefix, in channels, out channels) in execution order."""
    widths = cfg.widths
    plan = []
    cin = widths[0]
    for level, width in enumerate(widths):
        for k in range(RES_BLOCKS_PER_LEVEL):
            plan.append((f"down{level}/res{k}", cin, width))
            cin = width
    for level in reversed(range(cfg.levels - 1)):
        for k in range(RES_BLOCKS_PER_LEVEL):
            first = cin + widths[level] if k == 0 else cin
            plan.append((f"up{level}/res{k}", first, widths[level]))
            cin = widths[level]
    return plan


def init_denoiser(cfg: DenoiserConfig, seed: int | None = None) -> DenoiserWeights:
    """CAM projections start at zero; everything else is random."""
    init = _Init(cfg.seed if seed is None else seed)
    e0, e1 = cfg.encoder_widths
    init.conv("enc/conv0", 2 * cfg.in_bands, e0)
    init.conv("enc/conv1", e0, e1)
    init.linear("enc/out", e1, cfg.h_dim)
    init.linear("time/proj", cfg.time_dim, cfg.time_dim)
    init.conv("in", 3 * cfg.in_bands, cfg.widths[0])
    for prefix, cin, cout in _block_plan(cfg):
        init.block(prefix, cin, cout, cfg)
    init.conv("out", cfg.widths[0], cfg.in_bands, scale=_OUT_INIT_SCALE)
    return DenoiserWeights(cfg, init.params)


def encode_condition(c: Any, m: Any, params: Mapping[str, Any], cfg: DenoiserConfig | None = None) -> Tensor:
    """Global context h: conv+SiLU, pool, conv+SiLU, spatial mean, linear. c and m are N×H×W×B."""
    c_t, m_t = as_tensor(c), as_tensor(m)
    if c_t.shape != m_t.shape or c_t.ndim != 4:
        raise ShapeError(f"c {c_t.shape} and m {m_t.shape} must be matching NHWC arrays")
    x = ops.concat([c_t, m_t], axis=-1)
    x = ops.silu(conv(x, params, "enc/conv0"))
    x = ops.avgpool2(x)
    x = ops.silu(conv(x, params, "enc/conv1"))
    x = ops.mean(x, axis=(1, 2))
    return linear(x, params, "enc/out")


def _check_inputs(x: Tensor, c: Tensor, m: Tensor, ts: np.ndarray, cfg: DenoiserConfig) -> None:
    if x.ndim != 4 or x.shape != c.shape or x.shape != m.shape:
        raise ShapeError(f"x_t {x.shape}, c {c.shape} and m {m.shape} must be matching NHWC arrays")
    n, h, w, b = x.shape
    if b != cfg.in_bands:
        raise ShapeError(f"denoiser expects {cfg.in_bands} bands, got {b}")
    mult = cfg.spatial_multiple
    if h % mult or w % mult:
        raise ShapeError(f"spatial size {h}×{w} must be a multiple of {mult}")
    if ts.shape != (n,):
        raise ShapeError(f"need one timestep per sample, got {ts.shape} for batch {n}")


def predict_noise_batch(
    x_t: Any, ts: Any, c: Any, m: Any, params: Mapping[str, Any], cfg: DenoiserConfig
) -> Tensor:
    x = as_tensor(x_t)
    c_t, m_t = as_tensor(c), as_tensor(m)
    ts = np.asarray(ts, dtype=np.int64).reshape(-1)
    _check_inputs(x, c_t, m_t, ts, cfg)

    h = encode_condition(c_t, m_t, params, cfg)
    temb = ops.silu(linear(time_embed_batch(ts, cfg.time_dim), params, "time/proj"))

    widths = cfg.widths
    feat = conv(ops.concat([x, c_t, m_t], axis=-1), params, "in")
    skips: list[Tensor] = []
    for level in range(cfg.levels):
        for k in range(RES_BLOCKS_PER_LEVEL):
            feat = res_block(feat, temb, h, params, f"down{level}/res{k}", cfg.groups, cfg.use_cam)
        skips.append(feat)
        if level < cfg.levels - 1:
            feat = ops.avgpool2(feat)
    for level in reversed(range(cfg.levels - 1)):
        feat = ops.concat([ops.upsample_nearest2(feat), skips[level]], axis=-1)
        for k in range(RES_BLOCKS_PER_LEVEL):
            feat = res_block(feat, temb, h, params, f"up{level}/res{k}", cfg.groups, cfg.use_cam)

    feat = ops.silu(ops.groupnorm(feat, cfg.effective_groups(widths[0])))
    return conv(feat, params, "out")


def predict_noise(
    x_t: Any, t: int, pair: ConditionPair, weights: DenoiserWeights, params: Mapping[str, Any] | None = None
) -> Tensor:
    """ε̂ for one H×W×B state; returns an H×W×B tensor."""
    x = as_tensor(x_t)
    if x.ndim != 3:
        raise ShapeError(f"expected an H×W×B state, got {x.shape}")
    out = predict_noise_batch(
        ops.reshape(x, (1, *x.shape)),
        np.array([t]),
        pair.c[None],
        pair.m[None],
        params if params is not None else weights.params,
        weights.config,
    )
    return ops.reshape(out, x.shape)
