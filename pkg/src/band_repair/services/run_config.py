"""
Run configuration: one JSON document with a section per concern. Every field has a default;
unknown keys are rejected at every level so a typo cannot silently change an experiment.
"""

from __future__ import annotations

import json
import os
from dataclasses import MISSING, asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any

from ..denoiser.config import DenoiserConfig
from ..diffusion.guidance import GuidanceConfig
from ..diffusion.training import TrainConfig
from ..errors import ConfigError
from ..sensorlib.masking import MaskMode

EFFECTIVE_CONFIG_NAME = "effective_config.json"
WORKERS_ENV = "BAND_REPAIR_WORKERS"


def default_workers() -> int:
    """BAND_REPAIR_WORKERS if set to a positive integer, else 1."""
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return n if n > 0 else 1


@dataclass(frozen=True)
class DataConfig:
    train_scenes: int = 32
    heldout_scenes: int = 10
    height: int = 32
    width: int = 32
    bands: int = 12
    seed: int = 0
    heldout_seed: int = 10_000

    def __post_init__(self) -> None:
        for name in ("train_scenes", "heldout_scenes", "height", "width", "bands"):
            if getattr(self, name) < 1:
                raise ConfigError(f"data.{name} must be at least 1")


@dataclass(frozen=True)
class MaskConfig:
    mode: str = MaskMode.PER_BAND.value
    ratios: tuple[float, ...] = (0.1, 0.3, 0.5)
    band_keeps: tuple[int, ...] = (3, 5, 7)
    include_native: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        object.__setattr__(self, "band_keeps", tuple(int(k) for k in self.band_keeps))
        try:
            MaskMode(self.mode)
        except ValueError:
            raise ConfigError(f"unknown mask.mode {self.mode!r}") from None
        if any(not 0.0 <= r < 1.0 for r in self.ratios):
            raise ConfigError("mask.ratios must lie in [0, 1)")


@dataclass(frozen=True)
class EmulatorConfig:
    pairs: int = 20_000
    epochs: int = 200
    lr: float = 1e-3
    batch_size: int = 256
    holdout: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pairs < 100:
            raise ConfigError("emulator.pairs must be at least 100")
        if self.epochs < 1 or self.batch_size < 1 or self.lr <= 0:
            raise ConfigError("emulator.epochs, batch_size and lr must be positive")
        if not 0.0 < self.holdout < 1.0:
            raise ConfigError("emulator.holdout must lie in (0, 1)")


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig = field(default_factory=DataConfig)
    mask: MaskConfig = field(default_factory=MaskConfig)
    denoiser: DenoiserConfig = field(default_factory=DenoiserConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)
    emulator: EmulatorConfig = field(default_factory=EmulatorConfig)
    sample_steps: int = 50
    out_dir: str = "runs/default"
    seed: int = 0
    workers: int = field(default_factory=default_workers)

    def __post_init__(self) -> None:
        if self.denoiser.in_bands != self.data.bands:
            raise ConfigError(
                f"denoiser.in_bands ({self.denoiser.in_bands}) must equal data.bands ({self.data.bands})"
            )
        if self.sample_steps < 1:
            raise ConfigError("sample_steps must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def to_json_dict(self) -> dict[str, Any]:
        return asdict(self)


def _build(cls: type, raw: Any, where: str) -> Any:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where or 'config'} must be a JSON object")
    known = {f.name: f for f in fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown config key {where + '.' if where else ''}{key}")
    kwargs: dict[str, Any] = {}
    for name, value in raw.items():
        f = known[name]
        default = f.default_factory() if f.default_factory is not MISSING else f.default
        dotted = f"{where}.{name}" if where else name
        if is_dataclass(default):
            kwargs[name] = _build(type(default), value, dotted)
        elif isinstance(default, tuple):
            if not isinstance(value, list):
                raise ConfigError(f"{dotted} must be a list")
            kwargs[name] = tuple(value)
        else:
            if isinstance(value, (dict, list)):
                raise ConfigError(f"{dotted} must be a scalar")
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"invalid value in {where or 'config'}: {exc}") from exc


def config_from_dict(raw: dict[str, Any]) -> RunConfig:
    return _build(RunConfig, raw, "")


def load_config(path: str | Path | None) -> RunConfig:
    """Defaults merged with the JSON file at `path` (None means all defaults)."""
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def save_config(cfg: RunConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(cfg.to_json_dict(), f, indent=2)
    return path


def echo_config(cfg: RunConfig, out_dir: str | Path) -> Path:
    return save_config(cfg, Path(out_dir) / EFFECTIVE_CONFIG_NAME)
