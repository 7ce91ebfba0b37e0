"""The step loop: predict a residual per scale, accumulate, intervene, decode.

Ordering per step s:
  1. resize the running features to the step grid (step 1 uses the start
     features directly),
  2. forward pass, with a value hook installed for mid-stage injection,
  3. sample and accumulate the residual,
  4. early-stage row replacement / one-off pivot blend on the accumulated map,
     so the edit is what the next step consumes.

Sampling streams are keyed per (step, member), so disabling an edit never
shifts another step's random draws.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .align import ScheduleFunction, ValueHook, pivotal_interpolate, replace_initial
from .model import (
    Architecture,
    build_weights,
    decode,
    embed_text,
    forward_step,
    sample_residual,
    sos_features,
)
from .pyramid import BinaryQuantizer, Pyramid, accumulate, resize_for_step
from .types import FeatureMap, GenerationConfig, InterventionConfig, validate_config

DEFAULT_ARCH = Architecture()


@dataclass
class GenerationResult:
    images: np.ndarray  # (N, 3, H, W) in [0, 1]
    snapshots: list[FeatureMap] | None = None  # accumulated map after each step
    seconds: float = 0.0


def generate(
    prompts: Sequence[str],
    g: GenerationConfig | None = None,
    i: InterventionConfig | None = None,
    trace: bool = False,
    arch: Architecture = DEFAULT_ARCH,
) -> GenerationResult:
    g = g if g is not None else GenerationConfig()
    i = i if i is not None else InterventionConfig()
    g, i = validate_config(g, i)
    if not prompts:
        raise ValueError("at least one prompt required")
    n = len(prompts)
    if i.anchor_index > n:
        raise ValueError(f"anchor_index {i.anchor_index} exceeds batch size {n}")

    t0 = time.perf_counter()
    embeds = [embed_text(p, g.seed, dim=arch.text_dim) for p in prompts]
    weights = build_weights(g, arch)
    quantizer = BinaryQuantizer(bit_depth=g.channels)
    sched = ScheduleFunction.from_config(g, i)
    hf, wf = g.feature_hw

    f0 = sos_features(g, embeds)
    pyr = Pyramid.empty(n, g.channels, hf, wf)
    snapshots: list[FeatureMap] = []

    for s in range(1, g.num_steps + 1):
        try:
            f_in = f0 if s == 1 else resize_for_step(pyr.accumulated, s, g)
            hook = None
            if i.enable_injection and s in i.mid_steps:
                hook = ValueHook(alpha=sched.value(s), anchor_index=i.anchor_index)
            logits = forward_step(f_in, embeds, weights, s, hook)
            residual = sample_residual(
                logits, g.sampling_mode, g.temperature, g.seed, s, quantizer
            )
            pyr = accumulate(pyr, residual)
            if i.enable_replacement and s in i.early_steps:
                pyr = pyr.with_accumulated(replace_initial(pyr.accumulated, i.anchor_index))
            if i.enable_pivot and s == i.pivot_step:
                pyr = pyr.with_accumulated(
                    pivotal_interpolate(pyr.accumulated, i.alpha_pivot, i.anchor_index)
                )
        except ValueError as err:
            if "non-finite" in str(err):
                raise ValueError(f"non-finite intermediate at step {s}") from err
            raise
        if trace:
            snapshots.append(pyr.accumulated)

    images = decode(pyr.accumulated, g)
    return GenerationResult(
        images=images,
        snapshots=snapshots if trace else None,
        seconds=time.perf_counter() - t0,
    )


def generate_pair(
    prompts: Sequence[str],
    g: GenerationConfig | None = None,
    i: InterventionConfig | None = None,
    arch: Architecture = DEFAULT_ARCH,
) -> tuple[np.ndarray, np.ndarray]:
    """Shared-seed A/B: one run with the edits off, one with the given config.

    Keyed sampling streams guarantee identical random consumption, so any
    difference between the two batches comes from the edits alone.
    """
    g = g if g is not None else GenerationConfig()
    i = i if i is not None else InterventionConfig()
    baseline = generate(prompts, g, i.disabled(), arch=arch)
    edited = generate(prompts, g, i, arch=arch)
    return baseline.images, edited.images
