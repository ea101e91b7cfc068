"""
RTM emulator: a forward MLP (parameters → spectrum) and an inverse MLP
(spectrum → parameters). Their composition forward(inverse(x)) projects a spectrum
onto the learned physical manifold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import FormatError, ShapeError, StateError
from ..gradcore import Tape, Tensor, as_tensor, ops
from ..specdata.toy_rtm import PARAM_RANGES
from ..tensorfile import load_tensors, save_tensors

HIDDEN = 64
N_PARAMS = 3
_LAYERS = 3

_LO = np.array([r[0] for r in PARAM_RANGES])
_SPAN = np.array([r[1] - r[0] for r in PARAM_RANGES])


@dataclass
class EmulatorWeights:
    """Both networks' parameters keyed "forward/W0", "inverse/b2", ... plus training state."""

    bands: int
    params: dict[str, np.ndarray]
    trained: bool = False
    loss_history: list[float] = field(default_factory=list)
    heldout_rmse: float = float("nan")

    def require_trained(self) -> None:
        if not self.trained:
            raise StateError("emulator is not trained")

    def frozen_copy(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def to_tensors(self, prefix: str = "emulator/") -> dict[str, np.ndarray]:
        out = {f"{prefix}{k}": v for k, v in self.params.items()}
        out[f"{prefix}trained"] = np.array(1.0 if self.trained else 0.0)
        out[f"{prefix}loss_history"] = np.asarray(self.loss_history, dtype=np.float64)
        out[f"{prefix}heldout_rmse"] = np.array(self.heldout_rmse)
        return out

    @classmethod
    def from_tensors(cls, tensors: dict[str, np.ndarray], prefix: str = "emulator/") -> EmulatorWeights:
        params = {
            k[len(prefix):]: v
            for k, v in tensors.items()
            if k.startswith(prefix) and k[len(prefix):].split("/")[0] in ("forward", "inverse")
        }
        try:
            bands = int(params["forward/W2"].shape[1])
            trained = bool(tensors[f"{prefix}trained"] > 0.5)
            history = [float(v) for v in tensors[f"{prefix}loss_history"]]
            heldout = float(tensors.get(f"{prefix}heldout_rmse", np.array(np.nan)))
        except KeyError as exc:
            raise FormatError(f"missing emulator tensor {exc}") from exc
        return cls(bands, params, trained, history, heldout)


def init_emulator(bands: int, seed: int = 0, hidden: int = HIDDEN) -> EmulatorWeights:
    if bands < 1:
        raise ShapeError(f"bands must be positive, got {bands}")
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for net, sizes in (("forward", (N_PARAMS, hidden, hidden, bands)), ("inverse", (bands, hidden, hidden, N_PARAMS))):
        for i in range(_LAYERS):
            fan_in, fan_out = sizes[i], sizes[i + 1]
            params[f"{net}/W{i}"] = rng.normal(scale=np.sqrt(1.0 / fan_in), size=(fan_in, fan_out))
            params[f"{net}/b{i}"] = np.zeros((1, fan_out))
    return EmulatorWeights(bands, params)


def bind(tape: Tape, params: dict[str, np.ndarray], trainable: bool = False) -> dict[str, Tensor]:
    return {k: tape.leaf(v, requires_grad=trainable) for k, v in params.items()}


def _mlp(x: Tensor, params: dict[str, Any], net: str) -> Tensor:
    h = x
    for i in range(_LAYERS):
        h = ops.matmul(h, params[f"{net}/W{i}"]) + params[f"{net}/b{i}"]
        if i < _LAYERS - 1:
            h = ops.silu(h)
    return h


def forward_unit(p_unit: Any, params: dict[str, Any]) -> Tensor:
    """Spectra from parameters already scaled to [0, 1]; input (P, 3)."""
    return _mlp(as_tensor(p_unit), params, "forward")


def inverse_unit(spectra: Any, params: dict[str, Any]) -> Tensor:
    """Parameters in [0, 1] (sigmoid output) from (P, B) spectra."""
    return ops.sigmoid(_mlp(as_tensor(spectra), params, "inverse"))


def to_unit(params: np.ndarray) -> np.ndarray:
    return (np.asarray(params, dtype=np.float64) - _LO) / _SPAN


def from_unit(unit: np.ndarray) -> np.ndarray:
    return _LO + np.asarray(unit, dtype=np.float64) * _SPAN


def forward_spectra(params: np.ndarray, weights: EmulatorWeights) -> np.ndarray:
    """(P, 3) physical parameters → (P, B) spectra."""
    return forward_unit(to_unit(params), weights.params).data


def inverse_params(spectra: np.ndarray, weights: EmulatorWeights) -> np.ndarray:
    """(P, B) spectra → (P, 3) parameters inside their legal ranges."""
    return from_unit(inverse_unit(spectra, weights.params).data)


def round_trip(x: Any, weights: EmulatorWeights, params: dict[str, Any] | None = None) -> Tensor:
    """
    forward(inverse(x)) per pixel for physical spectra with a trailing band axis.
    Weights enter as constants, so gradients reach x only.
    """
    weights.require_trained()
    t = as_tensor(x)
    if t.shape[-1] != weights.bands:
        raise ShapeError(f"emulator expects {weights.bands} bands, got {t.shape[-1]}")
    lead = t.shape[:-1]
    flat = ops.reshape(t, (int(np.prod(lead)) if lead else 1, weights.bands))
    p = params if params is not None else weights.params
    out = forward_unit(inverse_unit(flat, p), p)
    return ops.reshape(out, t.shape)


def rtm_loss(x: Any, weights: EmulatorWeights) -> Tensor:
    """Mean squared distance between x and its round trip."""
    t = as_tensor(x)
    diff = t - round_trip(t, weights)
    return ops.mean(diff * diff)


def save_emulator(weights: EmulatorWeights, path: str | Path) -> Path:
    return save_tensors(weights.to_tensors(), path)


def load_emulator(path: str | Path) -> EmulatorWeights:
    tensors = load_tensors(path)
    try:
        return EmulatorWeights.from_tensors(tensors)
    except FormatError as exc:
        raise FormatError(exc.message, path=str(path)) from exc
