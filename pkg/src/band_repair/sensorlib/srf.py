"""
Spectral response functions and their projection onto a native band grid.

Each sensor band is a sampled response curve. A natural cubic spline carries it onto the
native band centers; the clamped, renormalized values are the weights of that band's
spectral average.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import DomainError, FormatError, ShapeError
from ..specdata.cube import CubeDomain, HyperCube, check_wavelengths, nearest_index

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SRFBand:
    grid_nm: np.ndarray
    response: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid_nm, dtype=np.float64)
        resp = np.asarray(self.response, dtype=np.float64)
        if grid.ndim != 1 or grid.shape != resp.shape:
            raise ShapeError(f"grid {grid.shape} and response {resp.shape} must be matching 1-D arrays")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise DomainError("SRF grid must be strictly increasing")
        if np.any(resp < 0) or not np.all(np.isfinite(resp)):
            raise DomainError("SRF response must be finite and non-negative")
        if not np.any(resp > 0):
            raise DomainError("SRF band has no positive response")
        object.__setattr__(self, "grid_nm", grid)
        object.__setattr__(self, "response", resp)


@dataclass(frozen=True)
class SensorSRF:
    name: str
    bands: tuple[SRFBand, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bands", tuple(self.bands))
        if not self.bands:
            raise DomainError(f"sensor {self.name!r} has no bands")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "bands": [{"grid_nm": b.grid_nm.tolist(), "response": b.response.tolist()} for b in self.bands],
        }

    @classmethod
    def from_json_dict(cls, raw: dict[str, Any]) -> SensorSRF:
        try:
            name = str(raw["name"])
            bands = tuple(SRFBand(np.asarray(b["grid_nm"]), np.asarray(b["response"])) for b in raw["bands"])
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed SRF entry: {exc}") from exc
        return cls(name, bands)


@dataclass(frozen=True)
class SensorProjection:
    """A sensor resolved onto one native grid: weight rows and the slot each band occupies."""

    sensor_name: str
    weights: np.ndarray  # (kept bands, B)
    slots: np.ndarray  # (kept bands,) native band index
    collisions: tuple[str, ...] = field(default=())

    def mask(self, bands: int) -> np.ndarray:
        m = np.zeros(bands)
        m[self.slots] = 1.0
        return m

    def observe(self, data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Weighted averages written into their slots plus the (H, W, B) sensor mask."""
        bands = data.shape[-1]
        x_obs = np.zeros_like(data)
        if self.slots.size:
            x_obs[..., self.slots] = data @ self.weights.T
        m_sens = np.broadcast_to(self.mask(bands), data.shape).copy()
        return x_obs, m_sens


def spline_response(band: SRFBand, target_wavelengths: np.ndarray) -> np.ndarray:
    """Natural cubic spline through the knots, zero outside the knot span, not clamped."""
    targets = np.asarray(target_wavelengths, dtype=np.float64)
    check_wavelengths(targets)
    if band.grid_nm.size < 2:
        raise DomainError("SRF band needs at least 2 knots")
    spline = CubicSpline(band.grid_nm, band.response, bc_type="natural")
    inside = (targets >= band.grid_nm[0]) & (targets <= band.grid_nm[-1])
    out = np.zeros_like(targets)
    out[inside] = spline(targets[inside])
    return out


def resample_srf(band: SRFBand, target_wavelengths: np.ndarray) -> np.ndarray:
    """Band weights on the target grid: spline, clamp negatives, renormalize to sum 1 (or all 0)."""
    weights = np.clip(spline_response(band, target_wavelengths), 0.0, None)
    total = weights.sum()
    if total <= 0:
        return np.zeros_like(weights)
    return weights / total


def project_sensor(sensor: SensorSRF, wavelengths: np.ndarray) -> SensorProjection:
    wl = np.asarray(wavelengths, dtype=np.float64)
    check_wavelengths(wl)
    # slot -> (pre-clamp total response, band position, weights)
    chosen: dict[int, tuple[float, int, np.ndarray]] = {}
    collisions: list[str] = []
    for k, band in enumerate(sensor.bands):
        raw = spline_response(band, wl)
        weights = resample_srf(band, wl)
        if not weights.any():
            collisions.append(f"{sensor.name} band {k} has no support on the native grid")
            continue
        center = float(weights @ wl)
        slot = nearest_index(wl, center)
        strength = float(raw.sum())
        if slot in chosen:
            kept, dropped = (k, chosen[slot][1]) if strength > chosen[slot][0] else (chosen[slot][1], k)
            collisions.append(f"{sensor.name} bands {kept} and {dropped} share slot {slot}; kept band {kept}")
            if strength <= chosen[slot][0]:
                continue
        chosen[slot] = (strength, k, weights)
    slots = np.array(sorted(chosen), dtype=np.int64)
    rows = np.array([chosen[s][2] for s in slots]).reshape(len(slots), wl.size)
    return SensorProjection(sensor.name, rows, slots, tuple(collisions))


def simulate_sensor(cube: HyperCube, sensor: SensorSRF) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """apply_srf plus the collision messages."""
    if cube.domain is not CubeDomain.PHYSICAL:
        raise DomainError("sensor simulation expects a physical cube")
    projection = project_sensor(sensor, cube.wavelengths)
    for message in projection.collisions:
        logger.warning("%s", message)
    x_obs, m_sens = projection.observe(cube.data)
    return x_obs, m_sens, projection.collisions


def apply_srf(cube: HyperCube, sensor: SensorSRF) -> tuple[np.ndarray, np.ndarray]:
    x_obs, m_sens, _ = simulate_sensor(cube, sensor)
    return x_obs, m_sens


def gaussian_band(center_nm: float, fwhm_nm: float, knot_step_nm: float = 5.0) -> SRFBand:
    """Gaussian response sampled on knot_step_nm knots across ±3σ."""
    if fwhm_nm <= 0:
        raise DomainError(f"fwhm must be positive, got {fwhm_nm}")
    sigma = fwhm_nm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    lo = np.floor((center_nm - 3.0 * sigma) / knot_step_nm) * knot_step_nm
    hi = np.ceil((center_nm + 3.0 * sigma) / knot_step_nm) * knot_step_nm
    grid = np.arange(lo, hi + 0.5 * knot_step_nm, knot_step_nm)
    return SRFBand(grid, np.exp(-((grid - center_nm) ** 2) / (2.0 * sigma**2)))


def delta_band(center_nm: float, half_width_nm: float) -> SRFBand:
    return SRFBand(
        np.array([center_nm - half_width_nm, center_nm, center_nm + half_width_nm]),
        np.array([0.0, 1.0, 0.0]),
    )


def identity_sensor(wavelengths: np.ndarray, name: str = "native") -> SensorSRF:
    """One delta band per native center; observes the cube unchanged."""
    wl = np.asarray(wavelengths, dtype=np.float64)
    check_wavelengths(wl)
    half = 0.25 * float(np.min(np.diff(wl))) if wl.size > 1 else 1.0
    return SensorSRF(name, tuple(delta_band(c, half) for c in wl))


def save_library(sensors: Iterable[SensorSRF], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as f:
        json.dump([s.to_json_dict() for s in sensors], f, indent=2)
    return target


def load_library(path: str | Path) -> list[SensorSRF]:
    p = Path(path)
    try:
        with open(p, encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}", path=str(p)) from exc
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list):
        raise FormatError("SRF library must be a JSON array", path=str(p))
    return [SensorSRF.from_json_dict(entry) for entry in raw]
