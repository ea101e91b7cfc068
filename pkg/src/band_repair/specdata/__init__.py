"""
Synthetic hyperspectral scenes: cubes, the toy radiative model, patching and HSC1 files.
"""

from .cube import (
    CubeDomain,
    HyperCube,
    check_wavelengths,
    denormalize,
    nearest_index,
    normalize,
    patch_count,
    patchify,
    to_normalized,
    to_physical,
)
from .cube_io import decode_cube, encode_cube, load_cube, save_cube
from .scenes import ParamFields, generate_fields, generate_scene, generate_scenes
from .toy_rtm import (
    PARAM_NAMES,
    PARAM_RANGES,
    SurfaceClass,
    default_wavelengths,
    leaf_reflectance,
    render,
    soil_reflectance,
    toy_rtm,
    water_reflectance,
)

__all__ = [
    "CubeDomain",
    "HyperCube",
    "PARAM_NAMES",
    "PARAM_RANGES",
    "ParamFields",
    "SurfaceClass",
    "check_wavelengths",
    "decode_cube",
    "default_wavelengths",
    "denormalize",
    "encode_cube",
    "generate_fields",
    "generate_scene",
    "generate_scenes",
    "leaf_reflectance",
    "load_cube",
    "nearest_index",
    "normalize",
    "patch_count",
    "patchify",
    "render",
    "save_cube",
    "soil_reflectance",
    "to_normalized",
    "to_physical",
    "toy_rtm",
    "water_reflectance",
]
