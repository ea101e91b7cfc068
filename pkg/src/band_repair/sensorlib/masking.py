"""
Dual stochastic masking: simulate a random sensor, then drop what it saw with
Bernoulli(1 - p_drop) draws. Produces the (C, M) condition pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ..errors import DomainError, ShapeError
from ..specdata.cube import CubeDomain, HyperCube
from .library import SensorLibrary, as_library
from .srf import SensorSRF, identity_sensor

P_DROP_RANGE = (0.1, 0.7)

Seed = int | np.random.Generator | None


class MaskMode(str, Enum):
    PER_BAND = "per_band"
    PER_ELEMENT = "per_element"


@dataclass(frozen=True)
class ConditionPair:
    """Sparse observation c (normalized domain, zero where unobserved) and its binary mask m."""

    c: np.ndarray
    m: np.ndarray
    p_drop_used: float
    sensor_name: str = ""

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=np.float64)
        m = np.asarray(self.m, dtype=np.float64)
        if c.shape != m.shape or c.ndim != 3:
            raise ShapeError(f"c {c.shape} and m {m.shape} must be matching H×W×B arrays")
        if not np.all((m == 0.0) | (m == 1.0)):
            raise DomainError("mask must be binary")
        if np.any(c[m == 0.0] != 0.0):
            raise DomainError("c must be zero wherever m is zero")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "m", m)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.c.shape  # type: ignore[return-value]

    def observed_bands(self) -> np.ndarray:
        """Bands observed at every pixel."""
        return np.flatnonzero(self.m.reshape(-1, self.m.shape[2]).min(axis=0) > 0)

    def kept_fraction(self) -> float:
        return float(self.m.mean())


def _check_p_drop(p_drop: float) -> None:
    if not 0.0 <= p_drop < 1.0:
        raise DomainError(f"p_drop must lie in [0, 1), got {p_drop}")


def _keep_draws(rng: np.random.Generator, shape: tuple[int, int, int], p_drop: float, mode: MaskMode) -> np.ndarray:
    if mode is MaskMode.PER_BAND:
        keep = rng.random(shape[2]) >= p_drop
        return np.broadcast_to(keep, shape).astype(np.float64)
    return (rng.random(shape) >= p_drop).astype(np.float64)


def dsm_mask(
    cube: HyperCube,
    library: SensorLibrary | Sequence[SensorSRF],
    p_drop: float,
    mode: MaskMode | str = MaskMode.PER_BAND,
    seed: Seed = None,
) -> ConditionPair:
    """
    Stage one samples a sensor uniformly and projects the cube through it (M_sens);
    stage two keeps each band (or each element) with probability 1 - p_drop.
    """
    if cube.domain is not CubeDomain.NORMALIZED:
        raise DomainError("dsm_mask expects a normalized cube")
    _check_p_drop(p_drop)
    lib = as_library(library)
    if len(lib) == 0:
        raise DomainError("sensor library is empty")
    mode = MaskMode(mode)
    rng = np.random.default_rng(seed)

    index = int(rng.integers(len(lib)))
    x_obs, m_sens = lib.projection(index, cube.wavelengths).observe(cube.data)
    m = m_sens * _keep_draws(rng, cube.shape, p_drop, mode)
    return ConditionPair(x_obs * m, m, float(p_drop), lib[index].name)


def sample_p_drop(seed: Seed = None) -> float:
    lo, hi = P_DROP_RANGE
    return float(np.random.default_rng(seed).uniform(lo, hi))


def band_subset_mask(cube: HyperCube, keep: int, seed: Seed = None) -> ConditionPair:
    """Exactly `keep` native bands observed at every pixel, chosen uniformly without replacement."""
    if cube.domain is not CubeDomain.NORMALIZED:
        raise DomainError("band_subset_mask expects a normalized cube")
    bands = cube.bands
    if not 1 <= keep <= bands:
        raise DomainError(f"keep must lie in [1, {bands}], got {keep}")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(bands, size=keep, replace=False))
    m = np.zeros(cube.shape)
    m[..., chosen] = 1.0
    return ConditionPair(cube.data * m, m, 1.0 - keep / bands, f"subset-{keep}")


def ratio_mask(
    cube: HyperCube,
    ratio: float,
    mode: MaskMode | str = MaskMode.PER_BAND,
    seed: Seed = None,
    sensor: SensorSRF | None = None,
) -> ConditionPair:
    """Random band masking at a fixed ratio through a single sensor (native by default)."""
    chosen = sensor if sensor is not None else identity_sensor(cube.wavelengths)
    return dsm_mask(cube, [chosen], ratio, mode, seed)
