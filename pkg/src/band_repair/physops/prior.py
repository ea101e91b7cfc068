"""Spectral prior S estimated from clean scenes."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from ..errors import ShapeError
from ..specdata.cube import HyperCube
from .correlation import SpectralPrior, corr_report

PRIOR_SCENES = 32


def estimate_prior(cubes: Iterable[HyperCube]) -> SpectralPrior:
    """Mean of per-scene correlation matrices, symmetrised with a unit diagonal."""
    mats = [corr_report(c.data) for c in cubes]
    if not mats:
        raise ShapeError("estimate_prior needs at least one scene")
    s = np.mean(mats, axis=0)
    s = np.clip(0.5 * (s + s.T), -1.0, 1.0)
    np.fill_diagonal(s, 1.0)
    return SpectralPrior(s)
