"""
Evaluation: image quality, index agreement, CSV reports and the interpolation baseline.
"""

from .baseline import interpolate_bands
from .indices import IndexAgreement, index_consistency, pearson
from .quality import PSNR_CAP_DB, psnr, rmse, sam, ssim
from .report import CSV_COLUMNS, MetricsReport, evaluate, read_csv, write_csv

__all__ = [
    "CSV_COLUMNS",
    "IndexAgreement",
    "MetricsReport",
    "PSNR_CAP_DB",
    "evaluate",
    "index_consistency",
    "interpolate_bands",
    "pearson",
    "psnr",
    "read_csv",
    "rmse",
    "sam",
    "ssim",
    "write_csv",
]
