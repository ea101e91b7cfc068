"""
Sensor response functions, the sensor library and dual stochastic masking.
"""

from .library import SensorLibrary, as_library, builtin_sensor, builtin_sensors, training_library
from .masking import (
    P_DROP_RANGE,
    ConditionPair,
    MaskMode,
    band_subset_mask,
    dsm_mask,
    ratio_mask,
    sample_p_drop,
)
from .srf import (
    SensorProjection,
    SensorSRF,
    SRFBand,
    apply_srf,
    delta_band,
    gaussian_band,
    identity_sensor,
    load_library,
    project_sensor,
    resample_srf,
    save_library,
    simulate_sensor,
    spline_response,
)

__all__ = [
    "ConditionPair",
    "MaskMode",
    "P_DROP_RANGE",
    "SRFBand",
    "SensorLibrary",
    "SensorProjection",
    "SensorSRF",
    "apply_srf",
    "as_library",
    "band_subset_mask",
    "builtin_sensor",
    "builtin_sensors",
    "delta_band",
    "dsm_mask",
    "gaussian_band",
    "identity_sensor",
    "load_library",
    "project_sensor",
    "ratio_mask",
    "resample_srf",
    "sample_p_drop",
    "save_library",
    "simulate_sensor",
    "spline_response",
    "training_library",
]
