"""Agreement of NDVI/NDWI maps between a repaired cube and the truth."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..physops.indices import IndexKind, spectral_index
from .quality import paired_arrays

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IndexAgreement:
    cc: float
    rmse: float
    degenerate: bool = False


def pearson(a: np.ndarray, b: np.ndarray) -> tuple[float, bool]:
    """Pearson CC; (0.0, True) when either side has zero variance."""
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt(np.sum(da * da) * np.sum(db * db))
    if denom == 0.0:
        return 0.0, True
    return float(np.sum(da * db) / denom), False


def index_consistency(x: Any, y: Any, kind: IndexKind, wavelengths: np.ndarray) -> IndexAgreement:
    a, b = paired_arrays(x, y)
    ia = spectral_index(a, kind, wavelengths).data.reshape(-1)
    ib = spectral_index(b, kind, wavelengths).data.reshape(-1)
    cc, degenerate = pearson(ia, ib)
    if degenerate:
        logger.debug("%s map has zero variance; CC reported as 0", kind.name)
    return IndexAgreement(cc, float(np.sqrt(np.mean((ia - ib) ** 2))), degenerate)
