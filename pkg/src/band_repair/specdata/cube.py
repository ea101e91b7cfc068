"""
HyperCube: an H×W×B reflectance cube with its wavelength axis and value domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import DomainError, ShapeError

MIN_BANDS = 4
_TOL = 1e-9


class CubeDomain(Enum):
    PHYSICAL = (0.0, 1.0)
    NORMALIZED = (-1.0, 1.0)

    def __init__(self, lo: float, hi: float) -> None:
        self.lo = lo
        self.hi = hi


@dataclass(frozen=True)
class HyperCube:
    """Reflectance cube. data is float64 H×W×B; wavelengths are band centers in nm."""

    data: np.ndarray
    wavelengths: np.ndarray
    domain: CubeDomain = CubeDomain.PHYSICAL

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        wl = np.asarray(self.wavelengths, dtype=np.float64)
        if data.ndim != 3:
            raise ShapeError(f"cube must be H×W×B, got shape {data.shape}")
        if wl.shape != (data.shape[2],):
            raise ShapeError(f"{wl.size} wavelengths for {data.shape[2]} bands")
        if data.shape[2] < MIN_BANDS:
            raise DomainError(f"cube needs at least {MIN_BANDS} bands, got {data.shape[2]}")
        check_wavelengths(wl)
        if data.size and (data.min() < self.domain.lo - _TOL or data.max() > self.domain.hi + _TOL):
            raise DomainError(
                f"values [{data.min():.6g}, {data.max():.6g}] outside {self.domain.name.lower()} range"
            )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "wavelengths", wl)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def bands(self) -> int:
        return self.data.shape[2]

    def with_data(self, data: np.ndarray, domain: CubeDomain | None = None) -> HyperCube:
        return HyperCube(data, self.wavelengths, domain or self.domain)


def check_wavelengths(wavelengths: np.ndarray) -> None:
    wl = np.asarray(wavelengths, dtype=np.float64)
    if wl.ndim != 1 or wl.size == 0:
        raise ShapeError("wavelengths must be a non-empty 1-D array")
    if wl.size > 1 and not np.all(np.diff(wl) > 0):
        raise DomainError("wavelengths must be strictly increasing")


def to_physical(x):
    """x ↦ (x + 1) / 2 on raw arrays or tensors."""
    return (x + 1.0) * 0.5


def to_normalized(x):
    """x ↦ 2x − 1 on raw arrays or tensors."""
    return x * 2.0 - 1.0


def normalize(cube: HyperCube) -> HyperCube:
    if cube.domain is not CubeDomain.PHYSICAL:
        raise DomainError("normalize expects a physical cube")
    return HyperCube(to_normalized(cube.data), cube.wavelengths, CubeDomain.NORMALIZED)


def denormalize(cube: HyperCube) -> HyperCube:
    if cube.domain is not CubeDomain.NORMALIZED:
        raise DomainError("denormalize expects a normalized cube")
    return HyperCube(to_physical(cube.data), cube.wavelengths, CubeDomain.PHYSICAL)


def patchify(cube: HyperCube, size: int, stride: int) -> list[HyperCube]:
    """Row-major sliding windows; windows that would overrun the edge are dropped."""
    h, w, _ = cube.shape
    if size < 1 or size > h or size > w:
        raise ShapeError(f"patch size {size} does not fit a {h}×{w} cube")
    if stride < 1:
        raise ShapeError(f"stride must be at least 1, got {stride}")
    patches = []
    for i in range(0, h - size + 1, stride):
        for j in range(0, w - size + 1, stride):
            patches.append(cube.with_data(cube.data[i:i + size, j:j + size, :].copy()))
    return patches


def patch_count(h: int, w: int, size: int, stride: int) -> int:
    return ((h - size) // stride + 1) * ((w - size) // stride + 1)


def nearest_index(wavelengths: np.ndarray, target_nm: float) -> int:
    """Index of the center closest to target_nm; ties go to the lower index."""
    wl = np.asarray(wavelengths, dtype=np.float64)
    check_wavelengths(wl)
    # argmin returns the first minimum, which is the lower index on ties.
    return int(np.argmin(np.abs(wl - float(target_nm))))
