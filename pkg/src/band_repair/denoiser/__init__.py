"""
Noise-prediction network: micro U-Net with time embedding, condition encoder and CAM.
"""

from .config import DenoiserConfig
from .layers import cam_modulate, time_embed, time_embed_batch
from .unet import DenoiserWeights, encode_condition, init_denoiser, predict_noise, predict_noise_batch

__all__ = [
    "DenoiserConfig",
    "DenoiserWeights",
    "cam_modulate",
    "encode_condition",
    "init_denoiser",
    "predict_noise",
    "predict_noise_batch",
    "time_embed",
    "time_embed_batch",
]
