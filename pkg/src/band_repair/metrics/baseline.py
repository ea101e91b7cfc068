"""
Reference repair: per-pixel linear interpolation in wavelength between observed bands,
held constant beyond the outermost observed band.
"""

from __future__ import annotations

import numpy as np

from ..sensorlib.masking import ConditionPair


def _interp_rows(values: np.ndarray, obs_wl: np.ndarray, wl: np.ndarray) -> np.ndarray:
    """np.interp applied to every row of `values` (P × k samples at obs_wl)."""
    k = obs_wl.size
    if k == 1:
        return np.repeat(values, wl.size, axis=1)
    hi = np.clip(np.searchsorted(obs_wl, wl), 1, k - 1)
    lo = hi - 1
    frac = np.clip((wl - obs_wl[lo]) / (obs_wl[hi] - obs_wl[lo]), 0.0, 1.0)
    return values[:, lo] * (1.0 - frac) + values[:, hi] * frac


def interpolate_bands(pair: ConditionPair, wavelengths: np.ndarray) -> np.ndarray:
    """Normalized H×W×B estimate; observed entries are kept, pixels with nothing observed get 0."""
    wl = np.asarray(wavelengths, dtype=np.float64)
    h, w, b = pair.shape
    c = pair.c.reshape(-1, b)
    m = pair.m.reshape(-1, b)
    out = np.zeros_like(c)
    patterns, inverse = np.unique(m, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    for p, pattern in enumerate(patterns):
        rows = np.flatnonzero(inverse == p)
        observed = np.flatnonzero(pattern > 0)
        if observed.size == 0:
            continue
        out[rows] = _interp_rows(c[np.ix_(rows, observed)], wl[observed], wl)
    out = np.where(m > 0, c, out)
    return np.clip(out, -1.0, 1.0).reshape(h, w, b)
