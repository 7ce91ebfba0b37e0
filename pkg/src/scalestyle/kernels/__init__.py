"""Numeric hot paths with two interchangeable implementations.

The accelerated path compiles the kernels with numba's @njit; the fallback is
vectorized numpy. Selection is governed by the SCALESTYLE_BACKEND environment
variable ("auto", "numba", or "numpy"; auto picks numba when importable).
set_backend() swaps at runtime, mainly for tests and the benchmark script.

Contracts shared by both backends:
  * bilinear_resize uses align-corners sampling; equal extents return a copy
    with identical bits, constant inputs stay constant, and corner samples
    reproduce corner samples exactly.
  * attend is softmax(q.k/sqrt(d)).v per head, numerically stabilized by
    row-max subtraction.
  * conv_bank is a valid cross-correlation of one image with a filter bank.
"""
from __future__ import annotations

import math
import os

import numpy as np

from . import numpy_impl

try:
    from . import numba_impl

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba_impl = None
    _HAVE_NUMBA = False


def _resolve(name: str) -> str:
    if name == "auto":
        return "numba" if _HAVE_NUMBA else "numpy"
    if name == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("SCALESTYLE_BACKEND=numba but numba is not importable")
        return "numba"
    if name == "numpy":
        return "numpy"
    raise ValueError(f"unknown backend '{name}' (expected auto, numba, or numpy)")


_active = _resolve(os.environ.get("SCALESTYLE_BACKEND", "auto"))


def active_backend() -> str:
    return _active


def set_backend(name: str) -> str:
    """Select the kernel implementation; returns the previous name."""
    global _active
    previous = _active
    _active = _resolve(name)
    return previous


def _impl():
    return numba_impl if _active == "numba" else numpy_impl


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize (N, C, h, w) to (N, C, out_h, out_w) with align-corners bilinear."""
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target extents must be >= 1, got ({out_h}, {out_w})")
    src = np.ascontiguousarray(src, dtype=np.float64)
    if src.ndim != 4:
        raise ValueError(f"expected a 4-axis tensor, got {src.ndim} axes")
    if (out_h, out_w) == src.shape[2:]:
        return src.copy()
    return _impl().bilinear_resize(src, int(out_h), int(out_w))


def attend(q: np.ndarray, k: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Scaled-dot-product attention per head.

    q: (heads, T, d); k, v: (heads, U, d) -> (heads, T, d).
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    k = np.ascontiguousarray(k, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    if q.ndim != 3 or k.shape != v.shape or q.shape[0] != k.shape[0] or q.shape[2] != k.shape[2]:
        raise ValueError(f"inconsistent attention shapes {q.shape}, {k.shape}, {v.shape}")
    scale = 1.0 / math.sqrt(q.shape[2])
    return _impl().attend(q, k, v, scale)


def conv_bank(img: np.ndarray, filters: np.ndarray) -> np.ndarray:
    """Valid cross-correlation: (C, H, W) x (F, C, kh, kw) -> (F, H-kh+1, W-kw+1)."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    filters = np.ascontiguousarray(filters, dtype=np.float64)
    if img.ndim != 3 or filters.ndim != 4 or filters.shape[1] != img.shape[0]:
        raise ValueError(f"inconsistent shapes image {img.shape}, filters {filters.shape}")
    kh, kw = filters.shape[2], filters.shape[3]
    if img.shape[1] < kh or img.shape[2] < kw:
        raise ValueError(f"image {img.shape[1:]} smaller than filter ({kh}, {kw})")
    return _impl().conv_bank(img, filters)
