"""Training-free alignment edits and the decay schedules that drive them.

All three edits blend batch members toward one anchor member and are pure,
affine transformations; the anchor row itself is always passed through
bit-untouched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import SCHEDULE_ALIASES, SCHEDULE_KINDS, FeatureMap, GenerationConfig, InterventionConfig


@dataclass(frozen=True)
class ScheduleFunction:
    """Maps a step position in [0, total_steps] to a blend weight in [0, 1].

    ours_exponential is (e^(-r*s/S) - e^(-r)) / (1 - e^(-r)): exactly 1 at
    s = 0 and exactly 0 at s = S, strictly decreasing and convex in between.
    The alternatives are simple monotone-decreasing shapes for comparison
    runs, except `constant` which stays at 0.5.
    """

    kind: str = "ours_exponential"
    total_steps: int = 12
    decay_rate: float = 3.4

    def __post_init__(self):
        object.__setattr__(self, "kind", SCHEDULE_ALIASES.get(self.kind, self.kind))
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind '{self.kind}'")
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")
        if self.kind == "ours_exponential" and not self.decay_rate > 0:
            raise ValueError("decay_rate must be > 0")

    def value(self, s: float) -> float:
        if not 0 <= s <= self.total_steps:
            raise ValueError(f"step {s} out of range 0..{self.total_steps}")
        u = s / self.total_steps
        if self.kind == "ours_exponential":
            tail = math.exp(-self.decay_rate)
            return (math.exp(-self.decay_rate * u) - tail) / (1.0 - tail)
        if self.kind == "constant":
            return 0.5
        if self.kind == "linear":
            return 1.0 - u
        if self.kind == "concave_up":
            return (1.0 - u) ** 2
        if self.kind == "concave_down":
            return 1.0 - u * u
        return 0.5 * (1.0 + math.cos(math.pi * u))  # cosine

    @classmethod
    def from_config(cls, g: GenerationConfig, i: InterventionConfig) -> "ScheduleFunction":
        return cls(kind=i.schedule, total_steps=g.num_steps, decay_rate=i.decay_rate)


def schedule_value(f: ScheduleFunction, s: float) -> float:
    return f.value(s)


def _check_anchor(n: int, anchor: int) -> None:
    if not 1 <= anchor <= n:
        raise IndexError(f"anchor index {anchor} out of range 1..{n}")


def replace_initial(f: FeatureMap, anchor: int = 1) -> FeatureMap:
    """Overwrite every batch row with the anchor row, bit-exactly."""
    _check_anchor(f.batch, anchor)
    if f.batch == 1:
        return f
    data = np.repeat(f.data[anchor - 1 : anchor], f.batch, axis=0)
    return FeatureMap.wrap(data)


def pivotal_interpolate(f: FeatureMap, alpha_pivot: float, anchor: int = 1) -> FeatureMap:
    """Blend each row toward the anchor row: alpha*anchor + (1-alpha)*row."""
    if not 0.0 <= alpha_pivot <= 1.0:
        raise ValueError(f"alpha_pivot {alpha_pivot} outside [0, 1]")
    _check_anchor(f.batch, anchor)
    if alpha_pivot == 0.0:
        return f
    if alpha_pivot == 1.0:
        return replace_initial(f, anchor)
    data = (1.0 - alpha_pivot) * f.data + alpha_pivot * f.data[anchor - 1 : anchor]
    data[anchor - 1] = f.data[anchor - 1]
    return FeatureMap.wrap(data)


def inject_values(v: np.ndarray, alpha_s: float, anchor: int = 1) -> np.ndarray:
    """Blend attention values toward the anchor's, per token and head.

    v has batch on axis 0; alpha 0 returns v unchanged (same object), alpha 1
    copies the anchor values into every row.
    """
    if not 0.0 <= alpha_s <= 1.0:
        raise ValueError(f"alpha_s {alpha_s} outside [0, 1]")
    _check_anchor(v.shape[0], anchor)
    if alpha_s == 0.0:
        return v
    if alpha_s == 1.0:
        return np.repeat(v[anchor - 1 : anchor], v.shape[0], axis=0)
    out = (1.0 - alpha_s) * v + alpha_s * v[anchor - 1 : anchor]
    out[anchor - 1] = v[anchor - 1]
    return out


@dataclass(frozen=True)
class ValueHook:
    """Callable installed inside self-attention to run inject_values."""

    alpha: float
    anchor_index: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha {self.alpha} outside [0, 1]")

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return inject_values(v, self.alpha, self.anchor_index)
