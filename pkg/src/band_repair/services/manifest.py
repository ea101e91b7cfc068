"""
Output manifests: sha256 of every file a command wrote, so reruns can be compared byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable

MANIFEST_NAME = "manifest.json"


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(root: str | Path, files: Iterable[str | Path]) -> list[dict[str, object]]:
    """Entries sorted by path relative to root."""
    root = Path(root)
    entries = []
    for f in files:
        p = Path(f)
        entries.append({"file": p.relative_to(root).as_posix(), "sha256": file_sha256(p), "bytes": p.stat().st_size})
    return sorted(entries, key=lambda e: e["file"])


def write_manifest(root: str | Path, files: Iterable[str | Path]) -> Path:
    root = Path(root)
    path = root / MANIFEST_NAME
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"files": build_manifest(root, files)}, f, indent=2)
    return path


def read_manifest(path: str | Path) -> dict[str, str]:
    """file → sha256."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    return {e["file"]: e["sha256"] for e in data.get("files", [])}
