"""Measurement harness: step-wise traces, edit ablations, schedule sweeps.

Every grid cell is a pure function of (seed list, configs, prompts); CSV
emission uses '.' decimals, repr floats, and '\\n' line endings so reruns are
byte-identical.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .engine import generate
from .metrics import (
    BANK_SEED,
    ConsistencyReport,
    chi_square,
    consistency_report,
    cosine,
    describe,
    rgb_histogram,
    style_consistency,
)
from .model import decode
from .types import GenerationConfig, InterventionConfig

# Cumulative edit combinations, in reporting order.
ABLATION_CONFIGS = (
    ("baseline", False, False, False),
    ("re", True, False, False),
    ("re+pfi", True, True, False),
    ("re+pfi+dsi", True, True, True),
)


@dataclass(frozen=True)
class StepTrace:
    """One step's distance-to-final measurements plus in-batch style spread."""

    step: int
    rgb_chi2: float
    content_sim: float
    style_sim: float


@dataclass(frozen=True)
class AblationRow:
    config: str
    re: bool
    pfi: bool
    dsi: bool
    s_dual: float
    s_obj: float
    s_sty: float
    seeds: tuple[int, ...]
    per_image_seconds: float


@dataclass(frozen=True)
class ScheduleRow:
    kind: str
    report: ConsistencyReport


def trace_run(
    prompts: Sequence[str],
    g: GenerationConfig | None = None,
    i: InterventionConfig | None = None,
    decode_each_step: bool = True,
    bank_seed: int = BANK_SEED,
) -> list[StepTrace]:
    """Decode the running features at every step and compare with the final
    decode: chi-square of RGB histograms, content cosine, in-batch style.

    decode_each_step=False skips the decoder's pixel upsampling for the
    per-step previews (cheaper, coarse); the metric contracts are unchanged.
    """
    g = g if g is not None else GenerationConfig()
    if len(prompts) < 2:
        raise ValueError("step traces need a batch of at least two prompts")
    result = generate(prompts, g, i, trace=True)
    previews = [decode(snap, g, upscale=decode_each_step) for snap in result.snapshots]
    final = previews[-1]
    final_hists = [rgb_histogram(img) for img in final]
    final_content = [describe(img, bank_seed).content_vector for img in final]

    traces = []
    for step, batch in enumerate(previews, start=1):
        chi = np.mean(
            [chi_square(rgb_histogram(img), final_hists[bi]) for bi, img in enumerate(batch)]
        )
        content = np.mean(
            [
                cosine(describe(img, bank_seed).content_vector, final_content[bi])
                for bi, img in enumerate(batch)
            ]
        )
        traces.append(
            StepTrace(
                step=step,
                rgb_chi2=float(chi),
                content_sim=float(content),
                style_sim=style_consistency(batch, bank_seed),
            )
        )
    return traces


def ablation_grid(
    prompt_sets: Sequence[Sequence[str]],
    seeds: Sequence[int],
    g: GenerationConfig | None = None,
    i: InterventionConfig | None = None,
) -> list[AblationRow]:
    """Run the four cumulative edit combinations over shared seeds.

    Reports mean consistency metrics and mean per-image wall-clock seconds;
    rows come out in baseline -> re -> re+pfi -> re+pfi+dsi order.
    """
    g = g if g is not None else GenerationConfig()
    i = i if i is not None else InterventionConfig()
    if not prompt_sets or not seeds:
        raise ValueError("prompt_sets and seeds must be non-empty")
    seeds = tuple(sorted(set(seeds)))
    rows = []
    for label, use_re, use_pfi, use_dsi in ABLATION_CONFIGS:
        cfg = replace(
            i,
            enable_replacement=use_re,
            enable_pivot=use_pfi,
            enable_injection=use_dsi,
        )
        objs, stys, per_img = [], [], []
        for seed in seeds:
            g_seed = replace(g, seed=seed)
            for prompts in prompt_sets:
                t0 = time.perf_counter()
                result = generate(prompts, g_seed, cfg)
                per_img.append((time.perf_counter() - t0) / len(prompts))
                report = consistency_report(result.images, prompts, embed_seed=seed)
                objs.append(report.s_obj)
                stys.append(report.s_sty)
        s_obj = float(np.mean(objs))
        s_sty = float(np.mean(stys))
        rows.append(
            AblationRow(
                config=label,
                re=use_re,
                pfi=use_pfi,
                dsi=use_dsi,
                s_dual=2.0 * s_obj * s_sty / (s_obj + s_sty),
                s_obj=s_obj,
                s_sty=s_sty,
                seeds=tuple(seeds),
                per_image_seconds=float(np.mean(per_img)),
            )
        )
    return rows


def schedule_grid(
    prompt_sets: Sequence[Sequence[str]],
    seeds: Sequence[int],
    g: GenerationConfig | None = None,
    kinds: Sequence[str] = ("ours_exponential",),
    i: InterventionConfig | None = None,
) -> list[ScheduleRow]:
    """One full-edit run per schedule kind per (seed, prompt set), averaged."""
    g = g if g is not None else GenerationConfig()
    i = i if i is not None else InterventionConfig()
    if not kinds:
        raise ValueError("kinds must be non-empty")
    seeds = tuple(sorted(set(seeds)))
    rows = []
    for kind in kinds:
        cfg = replace(i, schedule=kind)
        objs, stys = [], []
        for seed in seeds:
            g_seed = replace(g, seed=seed)
            for prompts in prompt_sets:
                result = generate(prompts, g_seed, cfg)
                report = consistency_report(result.images, prompts, embed_seed=seed)
                objs.append(report.s_obj)
                stys.append(report.s_sty)
        s_obj = float(np.mean(objs))
        s_sty = float(np.mean(stys))
        rows.append(
            ScheduleRow(
                kind=cfg.schedule,
                report=ConsistencyReport(
                    s_obj=s_obj,
                    s_sty=s_sty,
                    s_dual=2.0 * s_obj * s_sty / (s_obj + s_sty),
                ),
            )
        )
    return rows


def trace_csv(traces: Sequence[StepTrace]) -> str:
    lines = ["step,rgb_chi2,content_sim,style_sim"]
    for t in traces:
        lines.append(f"{t.step},{t.rgb_chi2!r},{t.content_sim!r},{t.style_sim!r}")
    return "\n".join(lines) + "\n"


def ablation_csv(rows: Sequence[AblationRow]) -> str:
    # Wall-clock seconds stay out of the CSV so reruns are byte-identical;
    # they are reported in the JSON summary instead.
    lines = ["config,re,pfi,dsi,s_dual,s_obj,s_sty"]
    for r in rows:
        lines.append(
            f"{r.config},{int(r.re)},{int(r.pfi)},{int(r.dsi)},"
            f"{r.s_dual!r},{r.s_obj!r},{r.s_sty!r}"
        )
    return "\n".join(lines) + "\n"


def schedule_csv(rows: Sequence[ScheduleRow]) -> str:
    lines = ["kind,s_dual,s_obj,s_sty"]
    for r in rows:
        lines.append(f"{r.kind},{r.report.s_dual!r},{r.report.s_obj!r},{r.report.s_sty!r}")
    return "\n".join(lines) + "\n"
