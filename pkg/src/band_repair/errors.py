"""
Exceptions raised by the band repair library. The CLI maps them to exit codes.
"""

from __future__ import annotations


class BandRepairError(Exception):
    """Base error; optional context is appended when the error is printed."""

    def __init__(
        self,
        message: str,
        *,
        path: str | None = None,
        step: int | None = None,
        op: str | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.path = path
        self.step = step
        self.op = op

    def __str__(self) -> str:
        parts = [self.message]
        if self.op:
            parts.append(f" in op {self.op}")
        if self.path:
            parts.append(f" in {self.path}")
        if self.step is not None:
            parts.append(f" at step {self.step}")
        return "".join(parts)


class ShapeError(BandRepairError):
    """Operand shapes do not conform."""


class NumericError(BandRepairError):
    """A value became NaN or infinite."""


class DomainError(BandRepairError):
    """An argument lies outside its legal range."""


class StateError(BandRepairError):
    """An object is used before it is ready (e.g. untrained emulator)."""


class FormatError(BandRepairError):
    """A file is truncated or has the wrong magic bytes."""


class ConfigError(DomainError):
    """Unknown or invalid run configuration key."""
