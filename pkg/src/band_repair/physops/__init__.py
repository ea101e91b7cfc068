"""
Differentiable physical operators: spectral indices, band correlation, KDE/KL,
the multi-scale physical losses and the guidance loss with its target.
"""

from .correlation import SpectralPrior, corr_matrix, corr_report, loss_pixel
from .density import default_grid, kde, kl_div, silverman_bandwidth
from .indices import (
    ALL_KINDS,
    EPS_STAB,
    IndexKind,
    band_select,
    index_bands,
    index_maps,
    require_index_grid,
    spectral_index,
)
from .losses import loss_image, loss_region, loss_rtm
from .prior import PRIOR_SCENES, estimate_prior
from .target import (
    IndexTarget,
    PhysTarget,
    PhysWeights,
    build_phys_target,
    loss_phy,
    loss_phy_terms,
)

__all__ = [
    "ALL_KINDS",
    "EPS_STAB",
    "IndexKind",
    "IndexTarget",
    "PRIOR_SCENES",
    "PhysTarget",
    "PhysWeights",
    "SpectralPrior",
    "band_select",
    "build_phys_target",
    "corr_matrix",
    "corr_report",
    "default_grid",
    "estimate_prior",
    "index_bands",
    "index_maps",
    "kde",
    "kl_div",
    "loss_image",
    "loss_phy",
    "loss_phy_terms",
    "loss_pixel",
    "loss_region",
    "loss_rtm",
    "require_index_grid",
    "silverman_bandwidth",
    "spectral_index",
]
