"""Numba-compiled hot kernels; mirrors numpy_impl's contracts.

Single-threaded on purpose: run-to-run byte determinism matters more here
than parallel speedups, and the fused softmax already wins by avoiding the
token-squared temporaries of the vectorized path.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    # Positions are computed multiply-first, (index * (n-1)) / (m-1), so the
    # far corner lands on n-1 exactly; matches numpy_impl._axis_coords.
    n, c, h, w = src.shape
    out = np.empty((n, c, out_h, out_w))
    for oy in range(out_h):
        pos_y = oy * (h - 1.0) / (out_h - 1.0) if out_h > 1 else 0.0
        ylo = int(np.floor(pos_y))
        if ylo > h - 2:
            ylo = h - 2
        if ylo < 0:
            ylo = 0
        fy = pos_y - ylo
        yhi = ylo + 1 if ylo + 1 < h else h - 1
        for ox in range(out_w):
            pos_x = ox * (w - 1.0) / (out_w - 1.0) if out_w > 1 else 0.0
            xlo = int(np.floor(pos_x))
            if xlo > w - 2:
                xlo = w - 2
            if xlo < 0:
                xlo = 0
            fx = pos_x - xlo
            xhi = xlo + 1 if xlo + 1 < w else w - 1
            for bn in range(n):
                for ch in range(c):
                    a = src[bn, ch, ylo, xlo]
                    b = src[bn, ch, ylo, xhi]
                    cc = src[bn, ch, yhi, xlo]
                    d = src[bn, ch, yhi, xhi]
                    top = b if fx == 1.0 else a + fx * (b - a)
                    bot = d if fx == 1.0 else cc + fx * (d - cc)
                    out[bn, ch, oy, ox] = bot if fy == 1.0 else top + fy * (bot - top)
    return out


@njit(cache=True)
def attend(q: np.ndarray, k: np.ndarray, v: np.ndarray, scale: float) -> np.ndarray:
    heads, t, d = q.shape
    u = k.shape[1]
    out = np.empty((heads, t, d))
    weights = np.empty(u)
    for hd in range(heads):
        for ti in range(t):
            m = -1e300
            for ui in range(u):
                s = 0.0
                for di in range(d):
                    s += q[hd, ti, di] * k[hd, ui, di]
                s *= scale
                weights[ui] = s
                if s > m:
                    m = s
            z = 0.0
            for ui in range(u):
                e = np.exp(weights[ui] - m)
                weights[ui] = e
                z += e
            for di in range(d):
                acc = 0.0
                for ui in range(u):
                    acc += weights[ui] * v[hd, ui, di]
                out[hd, ti, di] = acc / z
    return out


@njit(cache=True)
def conv_bank(img: np.ndarray, filters: np.ndarray) -> np.ndarray:
    c, h, w = img.shape
    f, _, kh, kw = filters.shape
    oh = h - kh + 1
    ow = w - kw + 1
    out = np.empty((f, oh, ow))
    for fi in range(f):
        for oy in range(oh):
            for ox in range(ow):
                acc = 0.0
                for ci in range(c):
                    for ky in range(kh):
                        for kx in range(kw):
                            acc += filters[fi, ci, ky, kx] * img[ci, oy + ky, ox + kx]
                out[fi, oy, ox] = acc
    return out
