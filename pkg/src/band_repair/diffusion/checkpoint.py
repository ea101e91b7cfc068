"""
Checkpoint = one ABD1 file holding the denoiser, its architecture, the noise schedule,
the frozen emulator and the spectral prior.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from ..denoiser.config import DenoiserConfig
from ..denoiser.unet import DenoiserWeights
from ..emulator.nets import EmulatorWeights
from ..errors import FormatError
from ..physops.correlation import SpectralPrior
from ..tensorfile import load_tensors, save_tensors
from .schedule import NoiseSchedule, make_schedule

_DENOISER = "denoiser/"
_CONFIG = "config/"
_EMULATOR = "emulator/"
_TUPLE_FIELDS = ("channel_multipliers", "encoder_widths")


@dataclass
class Checkpoint:
    weights: DenoiserWeights
    schedule: NoiseSchedule
    wavelengths: np.ndarray
    emulator: EmulatorWeights | None = None
    prior: SpectralPrior | None = None


def _config_tensors(cfg: DenoiserConfig) -> dict[str, np.ndarray]:
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        out[f"{_CONFIG}{f.name}"] = np.asarray(v, dtype=np.float64)
    return out


def _config_from(tensors: dict[str, np.ndarray], path: str) -> DenoiserConfig:
    kwargs = {}
    for f in fields(DenoiserConfig):
        key = f"{_CONFIG}{f.name}"
        if key not in tensors:
            raise FormatError(f"missing tensor {key}", path=path)
        v = tensors[key]
        if f.name in _TUPLE_FIELDS:
            kwargs[f.name] = tuple(int(x) for x in v.reshape(-1))
        elif f.name == "use_cam":
            kwargs[f.name] = bool(v > 0.5)
        else:
            kwargs[f.name] = int(v)
    return DenoiserConfig(**kwargs)


def checkpoint_tensors(
    weights: DenoiserWeights,
    emulator: EmulatorWeights | None,
    schedule: NoiseSchedule,
    *,
    wavelengths: np.ndarray,
    prior: SpectralPrior | None = None,
) -> dict[str, np.ndarray]:
    tensors = {f"{_DENOISER}{k}": v for k, v in weights.params.items()}
    tensors.update(_config_tensors(weights.config))
    tensors["schedule/T"] = np.array(float(schedule.T))
    tensors["schedule/beta_start"] = np.array(schedule.beta_start)
    tensors["schedule/beta_end"] = np.array(schedule.beta_end)
    tensors["meta/wavelengths"] = np.asarray(wavelengths, dtype=np.float64)
    if prior is not None:
        tensors["meta/prior"] = prior.s
    if emulator is not None:
        tensors.update(emulator.to_tensors(_EMULATOR))
    return tensors


def save_checkpoint(
    weights: DenoiserWeights,
    emulator: EmulatorWeights | None,
    schedule: NoiseSchedule,
    path: str | Path,
    *,
    wavelengths: np.ndarray,
    prior: SpectralPrior | None = None,
) -> Path:
    return save_tensors(checkpoint_tensors(weights, emulator, schedule, wavelengths=wavelengths, prior=prior), path)


def load_checkpoint(path: str | Path) -> Checkpoint:
    tensors = load_tensors(path)
    where = str(path)
    for key in ("schedule/T", "schedule/beta_start", "schedule/beta_end", "meta/wavelengths"):
        if key not in tensors:
            raise FormatError(f"missing tensor {key}", path=where)
    cfg = _config_from(tensors, where)
    params = {k[len(_DENOISER):]: v for k, v in tensors.items() if k.startswith(_DENOISER)}
    if not params:
        raise FormatError("checkpoint holds no denoiser weights", path=where)
    schedule = make_schedule(
        int(tensors["schedule/T"]), float(tensors["schedule/beta_start"]), float(tensors["schedule/beta_end"])
    )
    emulator = None
    if any(k.startswith(_EMULATOR) for k in tensors):
        emulator = EmulatorWeights.from_tensors(tensors, _EMULATOR)
    prior = SpectralPrior(tensors["meta/prior"]) if "meta/prior" in tensors else None
    return Checkpoint(DenoiserWeights(cfg, params), schedule, tensors["meta/wavelengths"], emulator, prior)
