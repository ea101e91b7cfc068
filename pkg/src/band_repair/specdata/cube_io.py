"""
HSC1 cube files.

Layout (little-endian): b"HSC1", u32 H, u32 W, u32 B, B float32 wavelengths,
then H·W·B float32 values, pixel-major and band-minor.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .cube import CubeDomain, HyperCube

MAGIC = b"HSC1"
_HEADER = struct.Struct("<4sIII")


def encode_cube(cube: HyperCube) -> bytes:
    h, w, b = cube.shape
    header = _HEADER.pack(MAGIC, h, w, b)
    wl = cube.wavelengths.astype("<f4").tobytes()
    values = np.ascontiguousarray(cube.data, dtype="<f4").tobytes()
    return header + wl + values


def decode_cube(raw: bytes, path: str | None = None) -> HyperCube:
    if len(raw) < _HEADER.size:
        raise FormatError("truncated header", path=path)
    magic, h, w, b = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", path=path)
    expected = _HEADER.size + 4 * b + 4 * h * w * b
    if len(raw) != expected:
        raise FormatError(f"expected {expected} bytes, found {len(raw)}", path=path)
    offset = _HEADER.size
    wl = np.frombuffer(raw, dtype="<f4", count=b, offset=offset).astype(np.float64)
    offset += 4 * b
    data = np.frombuffer(raw, dtype="<f4", count=h * w * b, offset=offset).astype(np.float64).reshape(h, w, b)
    return HyperCube(data, wl, CubeDomain.PHYSICAL)


def save_cube(cube: HyperCube, path: str | Path) -> Path:
    """Write a physical-domain cube. Parent folders are created."""
    if cube.domain is not CubeDomain.PHYSICAL:
        raise FormatError("HSC1 stores physical reflectance only", path=str(path))
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(encode_cube(cube))
    return target


def load_cube(path: str | Path) -> HyperCube:
    p = Path(path)
    return decode_cube(p.read_bytes(), path=str(p))
