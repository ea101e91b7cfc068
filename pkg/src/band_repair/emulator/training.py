"""
Training pairs drawn from the toy RTM and the joint fit of both emulator networks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from tqdm import tqdm

from ..errors import DomainError, NumericError
from ..gradcore import Tape, backward, ops
from ..gradcore.optim import AdamW
from ..specdata.toy_rtm import PARAM_RANGES, SurfaceClass, default_wavelengths, render
from .nets import EmulatorWeights, bind, forward_unit, init_emulator, inverse_unit, round_trip, to_unit

logger = logging.getLogger(__name__)

MIN_PAIRS = 100
DEFAULT_PAIRS = 20_000
HOLDOUT_FRACTION = 0.1


@dataclass(frozen=True)
class EmulatorPairs:
    """n (params, spectrum) pairs; params are physical (lai, cab, moisture)."""

    params: np.ndarray  # (n, 3)
    spectra: np.ndarray  # (n, B)
    wavelengths: np.ndarray

    def __len__(self) -> int:
        return self.params.shape[0]

    def __getitem__(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.params[i], self.spectra[i]

    def __iter__(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        return zip(self.params, self.spectra)

    def split(self, holdout: float, seed: int) -> tuple[EmulatorPairs, EmulatorPairs]:
        order = np.random.default_rng(seed).permutation(len(self))
        cut = len(self) - max(1, int(round(holdout * len(self))))
        train, held = order[:cut], order[cut:]
        return (
            EmulatorPairs(self.params[train], self.spectra[train], self.wavelengths),
            EmulatorPairs(self.params[held], self.spectra[held], self.wavelengths),
        )


def make_pairs(n: int, seed: int, wavelengths: np.ndarray | None = None) -> EmulatorPairs:
    """Vegetation spectra for parameters drawn uniformly in their ranges."""
    if n < MIN_PAIRS:
        raise DomainError(f"need at least {MIN_PAIRS} pairs, got {n}")
    wl = default_wavelengths() if wavelengths is None else np.asarray(wavelengths, dtype=np.float64)
    rng = np.random.default_rng(seed)
    params = np.column_stack([rng.uniform(lo, hi, size=n) for lo, hi in PARAM_RANGES])
    classes = np.full(n, int(SurfaceClass.VEGETATION))
    spectra = render(params[:, 0], params[:, 1], params[:, 2], classes, wl)
    return EmulatorPairs(params, spectra, wl)


def _mse(a, b):
    d = a - b
    return ops.mean(d * d)


def train_emulator(
    pairs: EmulatorPairs,
    epochs: int = 200,
    lr: float = 1e-3,
    seed: int = 0,
    batch_size: int = 256,
    holdout: float = HOLDOUT_FRACTION,
    progress: bool = False,
) -> EmulatorWeights:
    """
    Fit forward and inverse nets with Adam on MSE (spectra for the forward net,
    unit-scaled parameters for the inverse net). Records the per-epoch mean loss and
    the held-out spectrum RMSE of the forward net.
    """
    if len(pairs) == 0:
        raise DomainError("no training pairs")
    train, held = pairs.split(holdout, seed)
    bands = pairs.spectra.shape[1]
    weights = init_emulator(bands, seed)
    opt = AdamW(weights.params)
    rng = np.random.default_rng(seed + 1)
    p_unit = to_unit(train.params)

    for epoch in tqdm(range(epochs), desc="emulator", disable=not progress):
        order = rng.permutation(len(train))
        total, batches = 0.0, 0
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            tape = Tape()
            params = bind(tape, weights.params, trainable=True)
            loss = _mse(forward_unit(p_unit[idx], params), train.spectra[idx]) + _mse(
                inverse_unit(train.spectra[idx], params), p_unit[idx]
            )
            value = loss.item()
            if not np.isfinite(value):
                raise NumericError("emulator loss diverged", step=epoch)
            grads = backward(tape, loss)
            opt.step(weights.params, {k: grads[t.id].data for k, t in params.items()}, lr)
            total += value
            batches += 1
        weights.loss_history.append(total / batches)
        logger.debug("emulator epoch %d loss %.6g", epoch, weights.loss_history[-1])

    pred = forward_unit(to_unit(held.params), weights.params).data
    weights.heldout_rmse = float(np.sqrt(np.mean((pred - held.spectra) ** 2)))
    weights.trained = True
    logger.info("emulator trained: held-out spectrum RMSE %.4f", weights.heldout_rmse)
    return weights


def round_trip_rmse(spectra: np.ndarray, weights: EmulatorWeights) -> np.ndarray:
    """Per-spectrum RMSE of the round trip."""
    out = round_trip(spectra, weights).data
    return np.sqrt(np.mean((out - spectra) ** 2, axis=-1))
