"""
Multi-scale physical losses: region-level index distributions and image-level RTM consistency.
The pixel-level correlation loss lives in correlation.py.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from ..emulator.nets import EmulatorWeights, round_trip, rtm_loss
from ..errors import ShapeError
from ..gradcore import Tensor, as_tensor, ops, value
from .density import kde, kl_div
from .indices import IndexKind, spectral_index


def _patch_list(patches: Any) -> list[Any]:
    if isinstance(patches, Tensor):
        return [patches[i] for i in range(patches.shape[0])] if patches.ndim == 4 else [patches]
    if isinstance(patches, np.ndarray):
        return list(patches) if patches.ndim == 4 else [patches]
    return list(patches)


def loss_region(
    real_patches: Any,
    gen_patches: Any,
    kinds: Sequence[IndexKind],
    wavelengths: np.ndarray,
    grid: np.ndarray | None = None,
    bandwidth: float | None = None,
) -> Tensor:
    """
    Mean over patches and index kinds of KL(KDE(index(real)) ‖ KDE(index(gen))).
    Real densities are constants; gradients reach the generated patches only.
    Without an explicit bandwidth each density uses Silverman's rule on its own values, and the
    generated bandwidth stays on the tape.
    """
    real = _patch_list(real_patches)
    gen = _patch_list(gen_patches)
    if len(real) != len(gen) or not real:
        raise ShapeError(f"need matched patch pairs, got {len(real)} real and {len(gen)} generated")
    if not kinds:
        raise ShapeError("loss_region needs at least one index kind")
    terms = []
    for r, g in zip(real, gen):
        for kind in kinds:
            r_idx = spectral_index(value(r), kind, wavelengths).data.reshape(-1)
            g_idx = ops.reshape(spectral_index(g, kind, wavelengths), (-1,))
            p = kde(r_idx, grid, bandwidth).data
            q = kde(g_idx, grid, bandwidth)
            terms.append(kl_div(p, q))
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total * (1.0 / len(terms))


def loss_image(x_hat: Any, x0: Any, emulator: EmulatorWeights) -> Tensor:
    """Mean squared difference of emulator round trips; x0 is held constant."""
    emulator.require_trained()
    x_hat_t = as_tensor(x_hat)
    if x_hat_t.shape != np.shape(value(x0)):
        raise ShapeError(f"shapes differ: {x_hat_t.shape} vs {np.shape(value(x0))}")
    ref = round_trip(value(x0), emulator).data
    diff = round_trip(x_hat_t, emulator) - ref
    return ops.mean(diff * diff)


def loss_rtm(x_hat: Any, emulator: EmulatorWeights) -> Tensor:
    """Distance of x̂ from its own round trip (the emulator manifold constraint)."""
    return rtm_loss(x_hat, emulator)
