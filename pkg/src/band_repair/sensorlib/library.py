"""
The sensor library: built-in Gaussian sensors from the bundled table, plus a cache of
their projections onto native grids.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Iterable, Iterator, Sequence

import numpy as np

from ..errors import DomainError
from . import data as sensor_data
from .srf import SensorProjection, SensorSRF, gaussian_band, identity_sensor, project_sensor


@lru_cache(maxsize=1)
def _load_specs() -> tuple[tuple[str, tuple[float, ...], tuple[float, ...]], ...]:
    text = resources.files(sensor_data).joinpath("sensor_specs.json").read_text(encoding="utf-8")
    return tuple(
        (entry["name"], tuple(float(c) for c in entry["centers_nm"]), tuple(float(f) for f in entry["fwhm_nm"]))
        for entry in json.loads(text)
    )


def builtin_sensors() -> list[SensorSRF]:
    """The 15 bundled synthetic sensors."""
    return [
        SensorSRF(name, tuple(gaussian_band(c, f) for c, f in zip(centers, fwhm)))
        for name, centers, fwhm in _load_specs()
    ]


def builtin_sensor(name: str) -> SensorSRF:
    for sensor in builtin_sensors():
        if sensor.name == name:
            return sensor
    raise DomainError(f"unknown sensor {name!r}")


class SensorLibrary:
    """Read-only sensor list. Projections are memoised per native grid."""

    def __init__(self, sensors: Iterable[SensorSRF]) -> None:
        self._sensors: tuple[SensorSRF, ...] = tuple(sensors)
        self._projections: dict[tuple[int, bytes], SensorProjection] = {}

    def __len__(self) -> int:
        return len(self._sensors)

    def __iter__(self) -> Iterator[SensorSRF]:
        return iter(self._sensors)

    def __getitem__(self, index: int) -> SensorSRF:
        return self._sensors[index]

    @property
    def names(self) -> list[str]:
        return [s.name for s in self._sensors]

    def projection(self, index: int, wavelengths: np.ndarray) -> SensorProjection:
        wl = np.asarray(wavelengths, dtype=np.float64)
        key = (index, wl.tobytes())
        cached = self._projections.get(key)
        if cached is None:
            cached = project_sensor(self._sensors[index], wl)
            self._projections[key] = cached
        return cached


def as_library(sensors: SensorLibrary | Sequence[SensorSRF]) -> SensorLibrary:
    return sensors if isinstance(sensors, SensorLibrary) else SensorLibrary(sensors)


def training_library(wavelengths: np.ndarray, include_native: bool = True) -> SensorLibrary:
    """Built-in sensors, optionally with the native identity sensor appended."""
    sensors = builtin_sensors()
    if include_native:
        sensors.append(identity_sensor(wavelengths))
    return SensorLibrary(sensors)
