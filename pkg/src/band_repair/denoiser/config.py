"""Denoiser architecture settings."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError

RES_BLOCKS_PER_LEVEL = 2


@dataclass(frozen=True)
class DenoiserConfig:
    in_bands: int = 12
    base_width: int = 32
    channel_multipliers: tuple[int, ...] = (1, 2)
    groups: int = 8
    h_dim: int = 64
    time_dim: int = 64
    encoder_widths: tuple[int, int] = (32, 64)
    use_cam: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "channel_multipliers", tuple(int(m) for m in self.channel_multipliers))
        object.__setattr__(self, "encoder_widths", tuple(int(w) for w in self.encoder_widths))
        if not self.channel_multipliers or min(self.channel_multipliers) < 1:
            raise ConfigError("channel_multipliers must be a non-empty list of positive integers")
        if len(self.encoder_widths) != 2 or min(self.encoder_widths) < 1:
            raise ConfigError("encoder_widths must hold two positive widths")
        if self.in_bands < 1 or self.base_width < 1 or self.groups < 1 or self.h_dim < 1:
            raise ConfigError("in_bands, base_width, groups and h_dim must be positive")
        if self.time_dim < 2 or self.time_dim % 2:
            raise ConfigError("time_dim must be a positive even number")
        for c in self.normalized_widths():
            if c % self.effective_groups(c):
                raise ConfigError(f"{c} channels do not split into {self.effective_groups(c)} groups")

    @property
    def widths(self) -> list[int]:
        return [self.base_width * m for m in self.channel_multipliers]

    @property
    def levels(self) -> int:
        return len(self.channel_multipliers)

    @property
    def spatial_multiple(self) -> int:
        """H and W must be multiples of this (pooling depth, and the encoder's own pool)."""
        return max(2, 2 ** (self.levels - 1))

    def effective_groups(self, channels: int) -> int:
        return min(self.groups, channels)

    def normalized_widths(self) -> set[int]:
        """Every channel count that passes through a group normalization."""
        widths = self.widths
        out = set(widths)
        for level in range(self.levels - 1):
            out.add(widths[level + 1] + widths[level])
        out.add(widths[0])
        return out
