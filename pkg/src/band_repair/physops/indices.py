"""
Normalized-difference indices on physical reflectance.

NDVI = (NIR − Red + ε) / (NIR + Red + ε), NDWI = (Green − NIR + ε) / (Green + NIR + ε).
Both work on arrays and on taped tensors with any leading shape and a trailing band axis.
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Iterable

import numpy as np

from ..errors import DomainError
from ..gradcore import Tensor, as_tensor
from ..specdata.cube import HyperCube, nearest_index

GREEN_NM = 560.0
RED_NM = 665.0
NIR_NM = 842.0
EPS_STAB = 1e-6
MIN_INDEX_BANDS = 4


class IndexKind(Enum):
    NDVI = (NIR_NM, RED_NM)
    NDWI = (GREEN_NM, NIR_NM)

    def __init__(self, first_nm: float, second_nm: float) -> None:
        self.first_nm = first_nm
        self.second_nm = second_nm

    @classmethod
    def from_string(cls, s: str) -> IndexKind:
        try:
            return cls[s.upper()]
        except KeyError:
            raise DomainError(f"unknown index {s!r}") from None


ALL_KINDS: tuple[IndexKind, ...] = (IndexKind.NDVI, IndexKind.NDWI)


def band_select(wavelengths: np.ndarray, target_nm: float) -> int:
    return nearest_index(wavelengths, target_nm)


def index_bands(kind: IndexKind, wavelengths: np.ndarray) -> tuple[int, int]:
    first = band_select(wavelengths, kind.first_nm)
    second = band_select(wavelengths, kind.second_nm)
    if first == second:
        raise DomainError(f"{kind.name} roles resolve to the same band {first}")
    return first, second


def require_index_grid(wavelengths: np.ndarray) -> None:
    """Green, Red and NIR must land on three different bands."""
    if np.size(wavelengths) < MIN_INDEX_BANDS:
        raise DomainError(f"index terms need at least {MIN_INDEX_BANDS} bands, got {np.size(wavelengths)}")
    picks = {name: band_select(wavelengths, nm) for name, nm in (("green", GREEN_NM), ("red", RED_NM), ("nir", NIR_NM))}
    if len(set(picks.values())) < 3:
        raise DomainError(f"band grid cannot separate green/red/nir (resolved to {picks})")


def spectral_index(x: HyperCube | Any, kind: IndexKind, wavelengths: np.ndarray | None = None) -> Tensor:
    """Index map over the leading axes of physical reflectance x."""
    if isinstance(x, HyperCube):
        wavelengths = x.wavelengths if wavelengths is None else wavelengths
        x = x.data
    if wavelengths is None:
        raise DomainError("wavelengths are required for array input")
    first, second = index_bands(kind, wavelengths)
    t = as_tensor(x)
    a = t[..., first]
    b = t[..., second]
    return (a - b + EPS_STAB) / (a + b + EPS_STAB)


def index_maps(x: HyperCube, kinds: Iterable[IndexKind] = ALL_KINDS) -> dict[IndexKind, np.ndarray]:
    return {k: spectral_index(x, k).data for k in kinds}
