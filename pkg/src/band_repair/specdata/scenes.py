"""
Synthetic scenes: smooth random parameter fields rendered through the toy RTM.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.ndimage import uniform_filter

from ..errors import DomainError, ShapeError
from .cube import MIN_BANDS, HyperCube
from .toy_rtm import CAB_RANGE, LAI_RANGE, MOISTURE_RANGE, SurfaceClass, default_wavelengths, render

MIN_SIDE = 8
# Box radius 3 → 7-pixel window, applied twice.
_BLUR_SIZE = 7
_BLUR_PASSES = 2


@dataclass(frozen=True)
class ParamFields:
    lai: np.ndarray
    cab: np.ndarray
    moisture: np.ndarray
    class_map: np.ndarray

    def __post_init__(self) -> None:
        shape = np.shape(self.lai)
        for name in ("cab", "moisture", "class_map"):
            if np.shape(getattr(self, name)) != shape:
                raise ShapeError(f"{name} field shape differs from lai {shape}")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "lai": np.round(self.lai, 9).tolist(),
            "cab": np.round(self.cab, 9).tolist(),
            "moisture": np.round(self.moisture, 9).tolist(),
            "class_map": [[SurfaceClass(int(c)).name.lower() for c in row] for row in self.class_map],
        }

    def class_counts(self) -> dict[SurfaceClass, int]:
        return {c: int(np.count_nonzero(self.class_map == c)) for c in SurfaceClass}


def _smooth_field(rng: np.random.Generator, h: int, w: int, bounds: tuple[float, float]) -> np.ndarray:
    field = rng.uniform(size=(h, w))
    for _ in range(_BLUR_PASSES):
        field = uniform_filter(field, size=_BLUR_SIZE, mode="reflect")
    lo, hi = bounds
    span = field.max() - field.min()
    if span <= 0:
        return np.full((h, w), 0.5 * (lo + hi))
    unit = (field - field.min()) / span
    return lo + unit * (hi - lo)


def _class_map(field: np.ndarray) -> np.ndarray:
    low, high = np.quantile(field, [1.0 / 3.0, 2.0 / 3.0])
    classes = np.full(field.shape, int(SurfaceClass.SOIL), dtype=np.int64)
    classes[field < low] = SurfaceClass.WATER
    classes[field >= high] = SurfaceClass.VEGETATION
    return classes


def generate_fields(h: int, w: int, seed: int) -> ParamFields:
    rng = np.random.default_rng(seed)
    lai = _smooth_field(rng, h, w, LAI_RANGE)
    cab = _smooth_field(rng, h, w, CAB_RANGE)
    moisture = _smooth_field(rng, h, w, MOISTURE_RANGE)
    classes = _class_map(_smooth_field(rng, h, w, (0.0, 1.0)))
    return ParamFields(lai, cab, moisture, classes)


def generate_scene(
    h: int, w: int, b: int, seed: int, wavelengths: np.ndarray | None = None
) -> tuple[HyperCube, ParamFields]:
    """Deterministic scene for (h, w, b, seed)."""
    if h < MIN_SIDE or w < MIN_SIDE:
        raise DomainError(f"scene must be at least {MIN_SIDE}×{MIN_SIDE}, got {h}×{w}")
    if b < MIN_BANDS:
        raise DomainError(f"scene needs at least {MIN_BANDS} bands, got {b}")
    wl = default_wavelengths(b) if wavelengths is None else np.asarray(wavelengths, dtype=np.float64)
    if wl.shape != (b,):
        raise ShapeError(f"{wl.size} wavelengths for {b} bands")
    fields = generate_fields(h, w, seed)
    data = render(fields.lai, fields.cab, fields.moisture, fields.class_map, wl)
    return HyperCube(data, wl), fields


def generate_scenes(count: int, h: int, w: int, b: int, seed: int) -> list[HyperCube]:
    """count scenes with seeds seed, seed+1, ..."""
    return [generate_scene(h, w, b, seed + k)[0] for k in range(count)]
