"""FFT helpers shared by the cell solvers, fiber assembly and time steppers."""

from __future__ import annotations

import numpy as np


def cell_wavenumbers(n: int, dimension: int) -> list[np.ndarray]:
    """Angular frequencies 2*pi*m per axis for the unit cell at resolution n."""
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n)
    return [k] * dimension


def gradient(f: np.ndarray, freqs: list[np.ndarray]) -> list[np.ndarray]:
    """Spectral gradient; returns one array per axis, real when f is real."""
    fh = np.fft.fftn(f)
    parts = []
    for axis, k in enumerate(freqs):
        shape = [1] * f.ndim
        shape[axis] = -1
        dk = np.fft.ifftn(fh * (1j * k.reshape(shape)))
        parts.append(dk.real if np.isrealobj(f) else dk)
    return parts


def divergence(components: list[np.ndarray], freqs: list[np.ndarray]) -> np.ndarray:
    out = None
    real = all(np.isrealobj(c) for c in components)
    for axis, (c, k) in enumerate(zip(components, freqs)):
        shape = [1] * c.ndim
        shape[axis] = -1
        term = np.fft.ifftn(np.fft.fftn(c) * (1j * k.reshape(shape)))
        out = term if out is None else out + term
    return out.real if real else out


def resample_periodic(table: np.ndarray, n_new: int) -> np.ndarray:
    """Trigonometric resampling of a periodic table to resolution n_new per axis.

    Acts on the trailing axes of ``table`` (all assumed spatial with a common
    resolution); leading axes (e.g. matrix components) are preserved.
    """
    spatial = [ax for ax in range(table.ndim) if table.shape[ax] == table.shape[-1]]
    # only trailing equal-size axes are spatial
    d = 1
    while d < table.ndim and table.shape[-d - 1] == table.shape[-1]:
        d += 1
    d = min(d, table.ndim)
    spatial = list(range(table.ndim - d, table.ndim))
    n_old = table.shape[-1]
    if n_new == n_old:
        return table.copy()
    fh = np.fft.fftn(table, axes=spatial)
    out_shape = list(table.shape)
    for ax in spatial:
        out_shape[ax] = n_new
    out = np.zeros(out_shape, dtype=complex)
    half = min(n_old, n_new) // 2
    sl_old = [slice(None)] * table.ndim
    sl_new = [slice(None)] * table.ndim
    # copy the low-frequency block corner by corner
    import itertools

    for corners in itertools.product([0, 1], repeat=len(spatial)):
        for ax, c in zip(spatial, corners):
            if c == 0:
                sl_old[ax] = slice(0, half)
                sl_new[ax] = slice(0, half)
            else:
                sl_old[ax] = slice(n_old - half, n_old)
                sl_new[ax] = slice(n_new - half, n_new)
        out[tuple(sl_new)] = fh[tuple(sl_old)]
    out = np.fft.ifftn(out, axes=spatial) * (n_new / n_old) ** len(spatial)
    return out.real if np.isrealobj(table) else out


def pairwise_weighted_sumsq(values: np.ndarray, weights=None) -> float:
    """Deterministic (pairwise) accumulation of sum(w * |v|^2)."""
    mags = np.abs(values) ** 2
    if weights is not None:
        mags = mags * weights
    return float(np.sum(mags))
