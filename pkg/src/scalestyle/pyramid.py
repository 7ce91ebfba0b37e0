"""Coarse-to-fine residual machinery: upsampling, sign quantizer, accumulation.

A run predicts one quantized residual per scale; each residual is bilinearly
upsampled to the final feature grid and summed into the running feature map.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .types import FeatureMap, GenerationConfig, ResidualMap


@dataclass(frozen=True)
class BinaryQuantizer:
    """Per-channel sign quantizer; the codebook is the 2^bit_depth sign patterns."""

    bit_depth: int = 16
    magnitude: float = 1.0

    def __post_init__(self):
        if self.bit_depth < 1:
            raise ValueError("bit_depth must be >= 1")
        if not self.magnitude > 0:
            raise ValueError("magnitude must be > 0")


def up(r: ResidualMap | FeatureMap, target: tuple[int, int]) -> FeatureMap:
    """Align-corners bilinear resize to the target (height, width)."""
    return FeatureMap.wrap(kernels.bilinear_resize(r.data, target[0], target[1]))


def quantize(raw: FeatureMap, q: BinaryQuantizer, scale_index: int = 1) -> ResidualMap:
    """Map every element to sign(element) * magnitude; ties at 0 go positive."""
    if raw.channels != q.bit_depth:
        raise ValueError(
            f"channel count {raw.channels} does not match quantizer bit depth {q.bit_depth}"
        )
    data = np.where(raw.data >= 0.0, q.magnitude, -q.magnitude)
    return ResidualMap(data, scale_index)


@dataclass(frozen=True)
class Pyramid:
    """Residuals accepted so far plus their upsampled running sum.

    For a pyramid built purely by accumulate(), `accumulated` equals the sum
    of the bilinearly upsampled residuals; with_accumulated() intentionally
    decouples the two for cross-image feature edits between steps.
    """

    residuals: tuple[ResidualMap, ...]
    accumulated: FeatureMap

    @classmethod
    def empty(cls, batch: int, channels: int, height: int, width: int) -> "Pyramid":
        zero = FeatureMap.wrap(np.zeros((batch, channels, height, width)))
        return cls(residuals=(), accumulated=zero)

    def with_accumulated(self, f: FeatureMap) -> "Pyramid":
        if f.data.shape != self.accumulated.data.shape:
            raise ValueError("replacement feature map must keep the accumulated shape")
        return Pyramid(self.residuals, f)


def accumulate(p: Pyramid, r: ResidualMap) -> Pyramid:
    """Append residual r and add its upsampled form to the running sum."""
    expected = len(p.residuals) + 1
    if r.scale_index != expected:
        raise ValueError(f"out-of-order scale index {r.scale_index}, expected {expected}")
    target = p.accumulated.spatial
    if r.batch != p.accumulated.batch or r.data.shape[1] != p.accumulated.channels:
        raise ValueError("residual batch/channel extents do not match the pyramid")
    lifted = up(r, target)
    total = FeatureMap.wrap(p.accumulated.data + lifted.data)
    return Pyramid(p.residuals + (r,), total)


def resize_for_step(f: FeatureMap, s: int, g: GenerationConfig) -> FeatureMap:
    """Resize the accumulated features to the token grid of step s (1-based)."""
    if not 1 <= s <= g.num_steps:
        raise ValueError(f"step {s} out of range 1..{g.num_steps}")
    h, w = g.scale_schedule[s - 1]
    return FeatureMap.wrap(kernels.bilinear_resize(f.data, h, w))
