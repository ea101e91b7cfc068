"""
Reconstruction quality on physical-domain cubes (peak 1): PSNR, SSIM, RMSE and SAM.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from skimage.metrics import structural_similarity

from ..errors import DomainError, ShapeError
from ..specdata.cube import CubeDomain, HyperCube

PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SAM_NORM_FLOOR = 1e-8


def physical_array(x: HyperCube | Any) -> np.ndarray:
    if isinstance(x, HyperCube):
        if x.domain is not CubeDomain.PHYSICAL:
            raise DomainError("metrics expect physical-domain cubes")
        return x.data
    return np.asarray(x, dtype=np.float64)


def paired_arrays(x: Any, y: Any) -> tuple[np.ndarray, np.ndarray]:
    a, b = physical_array(x), physical_array(y)
    if a.shape != b.shape:
        raise ShapeError(f"shapes differ: {a.shape} vs {b.shape}")
    return a, b


def rmse(x: Any, y: Any) -> float:
    a, b = paired_arrays(x, y)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(x: Any, y: Any) -> float:
    """10·log10(1/MSE), capped at 99 dB."""
    a, b = paired_arrays(x, y)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / mse))


def ssim(x: Any, y: Any) -> float:
    """Mean over bands of Gaussian-window SSIM (11×11, σ = 1.5, data range 1)."""
    a, b = paired_arrays(x, y)
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    if a.ndim != 3:
        raise ShapeError(f"ssim expects H×W or H×W×B arrays, got {a.shape}")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ShapeError(f"ssim needs at least {SSIM_WINDOW}×{SSIM_WINDOW} pixels, got {a.shape[:2]}")
    scores = [
        structural_similarity(
            a[..., k],
            b[..., k],
            data_range=1.0,
            gaussian_weights=True,
            sigma=SSIM_SIGMA,
            use_sample_covariance=False,
            K1=0.01,
            K2=0.03,
        )
        for k in range(a.shape[2])
    ]
    return float(np.mean(scores))


def sam(x: Any, y: Any) -> float:
    """Mean per-pixel spectral angle in radians."""
    a, b = paired_arrays(x, y)
    a = a.reshape(-1, a.shape[-1])
    b = b.reshape(-1, b.shape[-1])
    norms = np.maximum(np.linalg.norm(a, axis=1), SAM_NORM_FLOOR) * np.maximum(
        np.linalg.norm(b, axis=1), SAM_NORM_FLOOR
    )
    cos = np.clip(np.sum(a * b, axis=1) / norms, -1.0, 1.0)
    return float(np.mean(np.arccos(cos)))
