"""
PhysTarget: what the physical loss compares a clean estimate against, built from the
observed condition pair. loss_phy combines masked index agreement, the spectral prior
and a reflectance-range hinge, with an optional emulator manifold term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from ..emulator.nets import EmulatorWeights
from ..errors import DomainError, ShapeError
from ..gradcore import Tensor, as_tensor, ops
from ..sensorlib.masking import ConditionPair
from ..specdata.cube import to_physical
from .correlation import SpectralPrior, loss_pixel
from .indices import ALL_KINDS, IndexKind, index_bands, spectral_index
from .losses import loss_rtm

TERMS = ("index", "prior", "bounds", "rtm")


@dataclass(frozen=True)
class IndexTarget:
    values: np.ndarray  # H×W
    valid: np.ndarray  # H×W, 1 where every band the index needs is observed

    @property
    def count(self) -> int:
        return int(self.valid.sum())


@dataclass(frozen=True)
class PhysWeights:
    index: float = 1.0
    prior: float = 1.0
    bounds: float = 1.0
    rtm: float = 0.0

    def __post_init__(self) -> None:
        for name in TERMS:
            if getattr(self, name) < 0:
                raise DomainError(f"physical loss weight {name} must be non-negative")


@dataclass(frozen=True)
class PhysTarget:
    index_maps: dict[IndexKind, IndexTarget]
    prior: SpectralPrior | None
    wavelengths: np.ndarray
    bounds: tuple[float, float] = (0.0, 1.0)
    emulator: EmulatorWeights | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        lo, hi = self.bounds
        if not lo < hi:
            raise DomainError(f"bounds must satisfy lo < hi, got {self.bounds}")
        for kind, target in self.index_maps.items():
            if not np.all((target.valid == 0) | (target.valid == 1)):
                raise DomainError(f"{kind.name} validity mask must be binary")


def build_phys_target(
    pair: ConditionPair,
    prior: SpectralPrior | None,
    kinds: Iterable[IndexKind] = ALL_KINDS,
    wavelengths: np.ndarray | None = None,
    emulator: EmulatorWeights | None = None,
) -> PhysTarget:
    """Index maps of the denormalized observation, valid only where all their bands were observed."""
    if wavelengths is None:
        raise DomainError("wavelengths are required to resolve index bands")
    phys = to_physical(pair.c)
    maps: dict[IndexKind, IndexTarget] = {}
    for kind in kinds:
        first, second = index_bands(kind, wavelengths)
        valid = pair.m[..., first] * pair.m[..., second]
        values = spectral_index(phys, kind, wavelengths).data * valid
        maps[kind] = IndexTarget(values, valid)
    if prior is not None and prior.bands != pair.shape[2]:
        raise ShapeError(f"prior has {prior.bands} bands, cube has {pair.shape[2]}")
    return PhysTarget(maps, prior, np.asarray(wavelengths, dtype=np.float64), (0.0, 1.0), emulator)


def loss_phy_terms(x_hat0: Any, target: PhysTarget, weights: PhysWeights | None = None) -> dict[str, Tensor]:
    """Unweighted terms of loss_phy for a normalized H×W×B estimate. Terms with weight 0 are omitted."""
    w = weights or PhysWeights()
    x = as_tensor(x_hat0)
    if x.ndim != 3:
        raise ShapeError(f"loss_phy expects an H×W×B estimate, got {x.shape}")
    lo, hi = target.bounds
    phys = to_physical(x)
    clipped = ops.clip(phys, lo, hi)
    terms: dict[str, Tensor] = {}

    if w.index > 0:
        parts = []
        for kind, t in target.index_maps.items():
            if t.count == 0:
                continue
            d = spectral_index(clipped, kind, target.wavelengths) - t.values
            parts.append(ops.sum(d * d * t.valid) * (1.0 / t.count))
        if parts:
            total = parts[0]
            for p in parts[1:]:
                total = total + p
            terms["index"] = total

    if w.prior > 0 and target.prior is not None:
        terms["prior"] = loss_pixel(phys, target.prior)

    if w.bounds > 0:
        over = ops.relu(phys - hi)
        under = ops.relu(lo - phys)
        terms["bounds"] = ops.mean(over * over + under * under)

    if w.rtm > 0 and target.emulator is not None:
        terms["rtm"] = loss_rtm(clipped, target.emulator)

    return terms


def loss_phy(x_hat0: Any, target: PhysTarget, weights: PhysWeights | None = None) -> Tensor:
    w = weights or PhysWeights()
    x = as_tensor(x_hat0)
    terms = loss_phy_terms(x, target, w)
    if not terms:
        return ops.sum(x) * 0.0
    total = None
    for name, term in terms.items():
        scaled = term * getattr(w, name)
        total = scaled if total is None else total + scaled
    return total
