"""Shared data model: batched feature tensors, run configuration, JSON forms.

All tensors are float64 and locked read-only after construction; batch and
step indices are 1-based throughout the public API.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Any, Mapping, Sequence

import numpy as np

DEFAULT_SCALE_SIDES = (1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 24, 32)
DEFAULT_SCALE_SCHEDULE = tuple((side, side) for side in DEFAULT_SCALE_SIDES)

SAMPLING_MODES = ("greedy", "seeded-stochastic")

SCHEDULE_KINDS = (
    "ours_exponential",
    "constant",
    "linear",
    "concave_up",
    "concave_down",
    "cosine",
)
# Short alias accepted in config JSON and CLI flags.
SCHEDULE_ALIASES = {"ours": "ours_exponential"}


class ConfigError(ValueError):
    """Configuration invariants were violated; carries every violation."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _locked(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_tensor(data: Any, ndim: int, what: str) -> np.ndarray:
    arr = np.array(data, dtype=np.float64, order="C")
    if arr.ndim != ndim:
        raise ValueError(f"{what}: expected {ndim} axes, got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what}: non-finite values")
    return _locked(arr)


@dataclass(frozen=True)
class FeatureMap:
    """Batched activation tensor, axes (batch, channel, y, x). Immutable."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_tensor(self.data, 4, "FeatureMap"))

    @classmethod
    def wrap(cls, arr: np.ndarray) -> "FeatureMap":
        """Adopt a freshly computed array without the defensive copy."""
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        if arr.ndim != 4:
            raise ValueError(f"FeatureMap: expected 4 axes, got {arr.ndim}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("FeatureMap: non-finite values")
        fm = object.__new__(cls)
        object.__setattr__(fm, "data", _locked(arr))
        return fm

    @property
    def batch(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[2]

    @property
    def width(self) -> int:
        return self.data.shape[3]

    @property
    def spatial(self) -> tuple[int, int]:
        return self.data.shape[2], self.data.shape[3]


@dataclass(frozen=True)
class ResidualMap:
    """Quantized correction predicted at one scale; same axes as FeatureMap."""

    data: np.ndarray
    scale_index: int

    def __post_init__(self):
        object.__setattr__(self, "data", _as_tensor(self.data, 4, "ResidualMap"))
        if self.scale_index < 1:
            raise ValueError("ResidualMap: scale_index must be >= 1")

    @property
    def batch(self) -> int:
        return self.data.shape[0]

    @property
    def spatial(self) -> tuple[int, int]:
        return self.data.shape[2], self.data.shape[3]


@dataclass(frozen=True)
class PromptEmbedding:
    """Hashed tokens and their per-token embedding rows for one prompt."""

    tokens_hashed: tuple[int, ...]
    embedding: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tokens_hashed", tuple(int(t) for t in self.tokens_hashed))
        object.__setattr__(self, "embedding", _as_tensor(self.embedding, 2, "PromptEmbedding"))
        if len(self.tokens_hashed) != self.embedding.shape[0]:
            raise ValueError("PromptEmbedding: one embedding row per token required")


def batch_slice(f: FeatureMap, n: int) -> FeatureMap:
    """Read-only (1, C, h, w) slab for batch member n (1-based)."""
    if not 1 <= n <= f.batch:
        raise IndexError(f"batch index {n} out of range 1..{f.batch}")
    return FeatureMap.wrap(f.data[n - 1 : n])


@dataclass(frozen=True)
class GenerationConfig:
    """Step count, token grids, output geometry, seed, and sampling mode."""

    num_steps: int = 12
    scale_schedule: tuple[tuple[int, int], ...] = DEFAULT_SCALE_SCHEDULE
    channels: int = 16
    full_res: tuple[int, int] = (128, 128)
    seed: int = 0
    sampling_mode: str = "greedy"
    temperature: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "scale_schedule", tuple((int(h), int(w)) for h, w in self.scale_schedule)
        )
        object.__setattr__(self, "full_res", tuple(int(v) for v in self.full_res))

    @property
    def feature_hw(self) -> tuple[int, int]:
        """Spatial extents of the final accumulated feature map."""
        return self.scale_schedule[-1]

    @property
    def pixel_factor(self) -> int:
        """Decoder upsampling factor, derived as full height / feature height."""
        return self.full_res[0] // self.scale_schedule[-1][0]


@dataclass(frozen=True)
class InterventionConfig:
    """Which alignment edits run, at which steps, with which weights."""

    early_steps: frozenset[int] = frozenset({1, 2})
    mid_steps: frozenset[int] = frozenset(range(3, 8))
    pivot_step: int = 3
    alpha_pivot: float = 0.4
    decay_rate: float = 3.4
    schedule: str = "ours_exponential"
    enable_replacement: bool = True
    enable_pivot: bool = True
    enable_injection: bool = True
    anchor_index: int = 1

    def __post_init__(self):
        object.__setattr__(self, "early_steps", frozenset(int(s) for s in self.early_steps))
        object.__setattr__(self, "mid_steps", frozenset(int(s) for s in self.mid_steps))
        object.__setattr__(self, "schedule", SCHEDULE_ALIASES.get(self.schedule, self.schedule))

    def disabled(self) -> "InterventionConfig":
        """Copy with all three edits switched off (baseline runs)."""
        from dataclasses import replace

        return replace(
            self, enable_replacement=False, enable_pivot=False, enable_injection=False
        )


def validate_config(
    g: GenerationConfig, i: InterventionConfig
) -> tuple[GenerationConfig, InterventionConfig]:
    """Check every invariant of both configs; report all violations at once."""
    errors: list[str] = []

    if g.num_steps < 3:
        errors.append("num_steps must be >= 3")
    if g.channels < 1:
        errors.append("channels must be >= 1")
    if len(g.full_res) != 2 or min(g.full_res) < 1:
        errors.append("full_res must be two positive extents")
    if not 0 <= g.seed < 2**64:
        errors.append("seed must fit in 64 bits")
    if g.sampling_mode not in SAMPLING_MODES:
        errors.append(f"unknown sampling_mode '{g.sampling_mode}'")
    if g.sampling_mode == "seeded-stochastic" and not g.temperature > 0:
        errors.append("temperature must be > 0 in seeded-stochastic mode")

    sched = g.scale_schedule
    if len(sched) != g.num_steps:
        errors.append("scale_schedule length must equal num_steps")
    if any(h < 1 or w < 1 for h, w in sched):
        errors.append("scale_schedule extents must be >= 1")
    for prev, cur in zip(sched, sched[1:]):
        if cur[0] < prev[0] or cur[1] < prev[1]:
            errors.append("scale_schedule must be non-decreasing in both axes")
            break
    if sched and min(g.full_res) >= 1 and min(sched[-1]) >= 1:
        hf, wf = sched[-1]
        hh, ww = g.full_res
        if hh % hf != 0 or ww % wf != 0 or hh // hf != ww // wf:
            errors.append("scale_schedule must end at full_res divided by one integer factor")

    if i.pivot_step not in i.mid_steps:
        errors.append("pivot outside mid stage")
    if i.early_steps & i.mid_steps:
        errors.append("overlapping stage sets")
    if i.early_steps and min(i.early_steps) < 1:
        errors.append("early_steps must be >= 1")
    if i.mid_steps and max(i.mid_steps) >= g.num_steps:
        errors.append("mid stage must end before the last step")
    if not 0.0 <= i.alpha_pivot <= 1.0:
        errors.append("alpha_pivot must lie in [0, 1]")
    if i.schedule not in SCHEDULE_KINDS:
        errors.append(f"unknown schedule kind '{i.schedule}'")
    if i.schedule == "ours_exponential" and not i.decay_rate > 0:
        errors.append("decay_rate must be > 0")
    if i.anchor_index < 1:
        errors.append("anchor_index must be >= 1")

    if errors:
        raise ConfigError(errors)
    return g, i


# --- JSON forms -------------------------------------------------------------
#
# One document holds both configs:
#   {"generation": {...}, "intervention": {...}}
# Field names match the dataclass fields exactly; unknown fields are errors.


def _from_mapping(cls, doc: Mapping[str, Any], what: str):
    names = [f.name for f in fields(cls)]
    unknown = sorted(set(doc) - set(names))
    if unknown:
        raise ConfigError([f"{what}: unknown field '{u}'" for u in unknown])
    return cls(**{k: doc[k] for k in names if k in doc})


def generation_to_dict(g: GenerationConfig) -> dict[str, Any]:
    return {
        "num_steps": g.num_steps,
        "scale_schedule": [list(hw) for hw in g.scale_schedule],
        "channels": g.channels,
        "full_res": list(g.full_res),
        "seed": g.seed,
        "sampling_mode": g.sampling_mode,
        "temperature": g.temperature,
    }


def intervention_to_dict(i: InterventionConfig) -> dict[str, Any]:
    return {
        "early_steps": sorted(i.early_steps),
        "mid_steps": sorted(i.mid_steps),
        "pivot_step": i.pivot_step,
        "alpha_pivot": i.alpha_pivot,
        "decay_rate": i.decay_rate,
        "schedule": i.schedule,
        "enable_replacement": i.enable_replacement,
        "enable_pivot": i.enable_pivot,
        "enable_injection": i.enable_injection,
        "anchor_index": i.anchor_index,
    }


def configs_to_dict(g: GenerationConfig, i: InterventionConfig) -> dict[str, Any]:
    return {"generation": generation_to_dict(g), "intervention": intervention_to_dict(i)}


def configs_from_dict(doc: Mapping[str, Any]) -> tuple[GenerationConfig, InterventionConfig]:
    unknown = sorted(set(doc) - {"generation", "intervention"})
    if unknown:
        raise ConfigError([f"config: unknown section '{u}'" for u in unknown])
    g = _from_mapping(GenerationConfig, doc.get("generation", {}), "generation")
    i = _from_mapping(InterventionConfig, doc.get("intervention", {}), "intervention")
    return g, i


def configs_to_json(g: GenerationConfig, i: InterventionConfig) -> str:
    return json.dumps(configs_to_dict(g, i), indent=2, sort_keys=True) + "\n"


def configs_from_json(text: str) -> tuple[GenerationConfig, InterventionConfig]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError([f"config: invalid JSON ({err})"]) from err
    if not isinstance(doc, Mapping):
        raise ConfigError(["config: top level must be an object"])
    return configs_from_dict(doc)
