"""
Building blocks: time embedding, conv/linear layers, conditional adaptive modulation
and the residual block. Parameters are looked up by path in a name → tensor map.
"""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from ..errors import ShapeError
from ..gradcore import Tensor, as_tensor, ops

Params = Mapping[str, Any]


def time_embed(t: int, dim: int) -> np.ndarray:
    """Interleaved (sin, cos) of t / 10000^(2i/dim)."""
    return time_embed_batch(np.array([t]), dim)[0]


def time_embed_batch(ts: np.ndarray, dim: int) -> np.ndarray:
    if dim % 2:
        raise ShapeError(f"time embedding dim must be even, got {dim}")
    ts = np.asarray(ts, dtype=np.float64).reshape(-1, 1)
    freqs = 1.0 / 10000.0 ** (2.0 * np.arange(dim // 2) / dim)
    angles = ts * freqs
    out = np.empty((ts.shape[0], dim))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def linear(x: Any, p: Params, name: str) -> Tensor:
    return ops.matmul(as_tensor(x), p[f"{name}/W"]) + p[f"{name}/b"]


def conv(x: Any, p: Params, name: str) -> Tensor:
    return ops.conv3x3(as_tensor(x), p[f"{name}/W"]) + p[f"{name}/b"]


def channel_proj(x: Tensor, p: Params, name: str) -> Tensor:
    """1×1 convolution as reshape + matmul."""
    n, h, w, c = x.shape
    flat = ops.reshape(x, (n * h * w, c))
    out = ops.matmul(flat, p[f"{name}/W"])
    return ops.reshape(out, (n, h, w, out.shape[1]))


def cam_modulate(f: Any, h: Any, p: Params, site: str, groups: int) -> Tensor:
    """
    (1 + Δγ) ⊙ groupnorm(f) + β with (Δγ, β) = linear(h), constant over space.
    Zero projection weights leave groupnorm(f) unchanged.
    """
    f = as_tensor(f)
    channels = f.shape[3]
    out_dim = p[f"{site}/W"].shape[1]
    if out_dim != 2 * channels:
        raise ShapeError(f"modulation site {site} produces {out_dim} values for {channels} channels")
    norm = ops.groupnorm(f, min(groups, channels))
    proj = linear(h, p, site)
    gamma = proj[:, :channels] + 1.0
    beta = proj[:, channels:]
    return ops.affine(norm, gamma, beta)


def norm_site(f: Tensor, h: Tensor, p: Params, site: str, groups: int, use_cam: bool) -> Tensor:
    if use_cam:
        return cam_modulate(f, h, p, site, groups)
    return ops.groupnorm(f, min(groups, f.shape[3]))


def res_block(
    x: Tensor, temb: Tensor, h: Tensor, p: Params, prefix: str, groups: int, use_cam: bool
) -> Tensor:
    """norm+CAM → SiLU → conv (+ time) → norm+CAM → SiLU → conv, plus the (projected) skip."""
    y = ops.silu(norm_site(x, h, p, f"{prefix}/cam1", groups, use_cam))
    y = conv(y, p, f"{prefix}/conv1")
    t = linear(temb, p, f"{prefix}/time")
    y = y + ops.reshape(t, (t.shape[0], 1, 1, t.shape[1]))
    y = ops.silu(norm_site(y, h, p, f"{prefix}/cam2", groups, use_cam))
    y = conv(y, p, f"{prefix}/conv2")
    skip = channel_proj(x, p, f"{prefix}/skip") if f"{prefix}/skip/W" in p else x
    return skip + y
