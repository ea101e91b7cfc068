"""
Frozen neural surrogate of the toy radiative model (forward and inverse MLPs).
"""

from .nets import (
    EmulatorWeights,
    forward_spectra,
    init_emulator,
    inverse_params,
    load_emulator,
    round_trip,
    rtm_loss,
    save_emulator,
)
from .training import EmulatorPairs, make_pairs, round_trip_rmse, train_emulator

__all__ = [
    "EmulatorPairs",
    "EmulatorWeights",
    "forward_spectra",
    "init_emulator",
    "inverse_params",
    "load_emulator",
    "make_pairs",
    "round_trip",
    "round_trip_rmse",
    "rtm_loss",
    "save_emulator",
    "train_emulator",
]
