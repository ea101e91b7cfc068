"""
MetricsReport: every metric for one (prediction, truth) pair, and its CSV row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from ..physops.indices import ALL_KINDS, IndexKind
from .indices import IndexAgreement, index_consistency
from .quality import psnr, rmse, sam, ssim

CSV_COLUMNS = [
    "method",
    "mask_ratio",
    "seed",
    "psnr",
    "ssim",
    "rmse",
    "sam",
    "ndvi_cc",
    "ndvi_rmse",
    "ndwi_cc",
    "ndwi_rmse",
]


@dataclass(frozen=True)
class MetricsReport:
    psnr_db: float
    ssim: float
    rmse: float
    sam_radians: float
    indices: dict[IndexKind, IndexAgreement] = field(default_factory=dict)

    def as_row(self, method: str, mask_ratio: float, seed: int) -> list[Any]:
        row: list[Any] = [method, mask_ratio, seed, self.psnr_db, self.ssim, self.rmse, self.sam_radians]
        for kind in ALL_KINDS:
            agreement = self.indices.get(kind)
            row += [agreement.cc, agreement.rmse] if agreement else ["", ""]
        return row


def evaluate(pred: Any, truth: Any, wavelengths: np.ndarray, kinds: Iterable[IndexKind] = ALL_KINDS) -> MetricsReport:
    """All metrics of `pred` against `truth`; both physical H×W×B."""
    return MetricsReport(
        psnr(pred, truth),
        ssim(pred, truth),
        rmse(pred, truth),
        sam(pred, truth),
        {kind: index_consistency(pred, truth, kind, wavelengths) for kind in kinds},
    )


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
