"""
ABD1 named-tensor files.

Layout (little-endian): b"ABD1", u32 tensor count, then per tensor: u16 name length,
UTF-8 name, u8 rank, rank × u32 dims, float64 payload (row-major).
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import FormatError

MAGIC = b"ABD1"


def encode_tensors(tensors: Mapping[str, np.ndarray]) -> bytes:
    """Tensors are written in name order so equal content gives equal bytes."""
    chunks = [MAGIC, struct.pack("<I", len(tensors))]
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f8")
        raw_name = name.encode("utf-8")
        if len(raw_name) > 0xFFFF or arr.ndim > 0xFF:
            raise FormatError(f"tensor {name!r} cannot be encoded")
        chunks.append(struct.pack("<H", len(raw_name)))
        chunks.append(raw_name)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes())
    return b"".join(chunks)


class _Reader:
    __slots__ = ("raw", "pos", "path")

    def __init__(self, raw: bytes, path: str | None) -> None:
        self.raw = raw
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise FormatError("truncated file", path=self.path)
        out = self.raw[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size))


def decode_tensors(raw: bytes, path: str | None = None) -> dict[str, np.ndarray]:
    """Parse the whole file before returning anything."""
    r = _Reader(raw, path)
    if r.take(4) != MAGIC:
        raise FormatError("bad magic", path=path)
    (count,) = r.unpack("<I")
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = r.unpack("<H")
        try:
            name = r.take(name_len).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError("tensor name is not UTF-8", path=path) from exc
        (rank,) = r.unpack("<B")
        dims = r.unpack(f"<{rank}I") if rank else ()
        n = int(np.prod(dims)) if rank else 1
        payload = r.take(8 * n)
        if n == 0:
            out[name] = np.zeros(dims)
            continue
        out[name] = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(dims)
    if r.pos != len(raw):
        raise FormatError(f"{len(raw) - r.pos} trailing bytes", path=path)
    return out


def save_tensors(tensors: Mapping[str, np.ndarray], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(encode_tensors(tensors))
    return target


def load_tensors(path: str | Path) -> dict[str, np.ndarray]:
    p = Path(path)
    return decode_tensors(p.read_bytes(), path=str(p))
