"""
Closed-form toy radiative transfer model.

Leaf and bare-soil curves are mixed by a Beer–Lambert canopy gap fraction; water is an
exponentially decaying curve damped by moisture. Every output stays inside [0, 1].
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np
from scipy.special import expit

from ..errors import DomainError
from .cube import check_wavelengths

LAI_RANGE = (0.0, 6.0)
CAB_RANGE = (0.0, 1.0)
MOISTURE_RANGE = (0.0, 1.0)
PARAM_RANGES = (LAI_RANGE, CAB_RANGE, MOISTURE_RANGE)
PARAM_NAMES = ("lai", "cab", "moisture")

CANOPY_K = 0.5
DEFAULT_BAND_RANGE_NM = (450.0, 950.0)
DEFAULT_BANDS = 12

# Soil brightness lost at full moisture (soil class only).
_SOIL_MOISTURE_DARKENING = 0.25


class SurfaceClass(IntEnum):
    VEGETATION = 0
    SOIL = 1
    WATER = 2


def default_wavelengths(bands: int = DEFAULT_BANDS) -> np.ndarray:
    lo, hi = DEFAULT_BAND_RANGE_NM
    return np.linspace(lo, hi, bands)


def leaf_reflectance(wavelengths: np.ndarray, cab: np.ndarray | float) -> np.ndarray:
    """Pure leaf curve: green bump, red-edge sigmoid and NIR plateau. Broadcasts cab against λ."""
    wl = np.asarray(wavelengths, dtype=np.float64)
    cab = np.asarray(cab, dtype=np.float64)[..., None]
    nir_amp = 0.3 + 0.2 * cab
    green = 0.12 * (1.0 - 0.5 * cab) * np.exp(-((wl - 550.0) ** 2) / (2.0 * 30.0**2))
    return 0.04 + nir_amp * expit((wl - 720.0) / 15.0) + green


def soil_reflectance(wavelengths: np.ndarray) -> np.ndarray:
    wl = np.asarray(wavelengths, dtype=np.float64)
    return 0.15 + 0.0003 * (wl - 450.0)


def water_reflectance(wavelengths: np.ndarray, moisture: np.ndarray | float) -> np.ndarray:
    wl = np.asarray(wavelengths, dtype=np.float64)
    moisture = np.asarray(moisture, dtype=np.float64)[..., None]
    return 0.08 * np.exp(-(wl - 450.0) / 150.0) * (1.0 - 0.5 * moisture)


def _check_range(name: str, values: np.ndarray, bounds: tuple[float, float]) -> None:
    lo, hi = bounds
    if values.size and (np.min(values) < lo or np.max(values) > hi or not np.all(np.isfinite(values))):
        raise DomainError(f"{name} outside [{lo:g}, {hi:g}]")


def render(
    lai: np.ndarray,
    cab: np.ndarray,
    moisture: np.ndarray,
    classes: np.ndarray,
    wavelengths: np.ndarray,
) -> np.ndarray:
    """Vectorised toy RTM: parameter arrays of one shape → reflectance with a trailing band axis."""
    lai = np.asarray(lai, dtype=np.float64)
    cab = np.asarray(cab, dtype=np.float64)
    moisture = np.asarray(moisture, dtype=np.float64)
    classes = np.asarray(classes)
    for name, values, bounds in zip(PARAM_NAMES, (lai, cab, moisture), PARAM_RANGES):
        _check_range(name, values, bounds)
    if not np.all(np.isin(classes, [c.value for c in SurfaceClass])):
        raise DomainError("unknown surface class")
    wl = np.asarray(wavelengths, dtype=np.float64)
    check_wavelengths(wl)

    soil = soil_reflectance(wl)
    gap = np.exp(-CANOPY_K * lai)[..., None]
    vegetation = soil * gap + leaf_reflectance(wl, cab) * (1.0 - gap)
    bare = soil * (1.0 - _SOIL_MOISTURE_DARKENING * moisture[..., None])
    water = water_reflectance(wl, moisture)
    cls = classes[..., None]
    out = np.where(
        cls == SurfaceClass.VEGETATION,
        vegetation,
        np.where(cls == SurfaceClass.SOIL, bare, water),
    )
    return np.clip(out, 0.0, 1.0)


def toy_rtm(
    lai: float,
    cab: float,
    moisture: float,
    surface: SurfaceClass | int,
    wavelengths: np.ndarray,
) -> np.ndarray:
    """Spectrum of one pixel."""
    return render(np.float64(lai), np.float64(cab), np.float64(moisture), np.asarray(int(surface)), wavelengths)
