"""Vectorized numpy implementations of the hot kernels.

The bilinear lerp is written as u + f*(v-u) with an explicit f == 1 branch so
constants and corner samples survive bit-exactly; numba_impl mirrors the same
expressions operation for operation.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _axis_coords(n_out: int, n_src: int) -> tuple[np.ndarray, np.ndarray]:
    """Source index and fraction per output position (align-corners)."""
    if n_out == 1:
        pos = np.zeros(1, dtype=np.float64)
    else:
        pos = np.arange(n_out, dtype=np.float64) * (n_src - 1.0) / (n_out - 1.0)
    lo = np.floor(pos).astype(np.int64)
    np.clip(lo, 0, max(n_src - 2, 0), out=lo)
    frac = pos - lo
    return lo, frac


def _lerp(u: np.ndarray, v: np.ndarray, f: np.ndarray) -> np.ndarray:
    return np.where(f == 1.0, v, u + f * (v - u))


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    n_src_h, n_src_w = src.shape[2], src.shape[3]
    ylo, fy = _axis_coords(out_h, n_src_h)
    xlo, fx = _axis_coords(out_w, n_src_w)
    yhi = np.minimum(ylo + 1, n_src_h - 1)
    xhi = np.minimum(xlo + 1, n_src_w - 1)
    fy = fy[:, None]
    fx = fx[None, :]
    a = src[:, :, ylo[:, None], xlo[None, :]]
    b = src[:, :, ylo[:, None], xhi[None, :]]
    c = src[:, :, yhi[:, None], xlo[None, :]]
    d = src[:, :, yhi[:, None], xhi[None, :]]
    top = _lerp(a, b, fx)
    bot = _lerp(c, d, fx)
    return _lerp(top, bot, fy)


def attend(q: np.ndarray, k: np.ndarray, v: np.ndarray, scale: float) -> np.ndarray:
    scores = np.matmul(q, k.transpose(0, 2, 1)) * scale
    scores -= scores.max(axis=2, keepdims=True)
    np.exp(scores, out=scores)
    scores /= scores.sum(axis=2, keepdims=True)
    return np.matmul(scores, v)


def conv_bank(img: np.ndarray, filters: np.ndarray) -> np.ndarray:
    kh, kw = filters.shape[2], filters.shape[3]
    windows = sliding_window_view(img, (kh, kw), axis=(1, 2))
    return np.einsum("chwkl,fckl->fhw", windows, filters, optimize=True)
