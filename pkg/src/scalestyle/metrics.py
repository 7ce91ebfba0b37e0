"""Image-set measurements: RGB histograms, descriptor proxies, consistency.

The descriptor is a fixed seeded bank of 16 5x5 filters over RGB: content is
the per-filter response mean/stddev, style is the normalized Gram of the
response maps. Deterministic by construction; absolute values are only
comparable within this package's own runs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .model import embed_text
from .rng import stream
from .types import _locked

BANK_SEED = 101
FILTER_COUNT = 16
FILTER_SIZE = 5
CHI2_EPS = 1e-12


@dataclass(frozen=True)
class RgbHistogram:
    """Per-channel histogram over [0, 1]; each channel's mass sums to one."""

    counts: np.ndarray  # (3, bins)

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.float64)
        if counts.ndim != 2 or counts.shape[0] != 3 or counts.shape[1] < 2:
            raise ValueError("counts must be (3, bins >= 2)")
        if np.any(counts < 0):
            raise ValueError("histogram mass must be non-negative")
        sums = counts.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError("each channel's mass must sum to 1")
        object.__setattr__(self, "counts", _locked(counts))

    @property
    def bins(self) -> int:
        return self.counts.shape[1]


@dataclass(frozen=True)
class FeatureDescriptor:
    content_vector: np.ndarray
    gram_vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "content_vector", _locked(np.array(self.content_vector, dtype=np.float64))
        )
        object.__setattr__(
            self, "gram_vector", _locked(np.array(self.gram_vector, dtype=np.float64))
        )
        if not (
            np.all(np.isfinite(self.content_vector)) and np.all(np.isfinite(self.gram_vector))
        ):
            raise ValueError("descriptor must be finite")


@dataclass(frozen=True)
class ConsistencyReport:
    s_obj: float
    s_sty: float
    s_dual: float

    def to_json(self) -> str:
        return json.dumps(
            {"s_dual": self.s_dual, "s_obj": self.s_obj, "s_sty": self.s_sty},
            sort_keys=True,
        )


def rgb_histogram(img: np.ndarray, bins: int = 32) -> RgbHistogram:
    """Uniform bins over [0, 1], last bin right-closed, normalized per channel."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ValueError("image must be (3, H, W)")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("pixel values must lie in [0, 1]")
    counts = np.stack(
        [np.histogram(ch, bins=bins, range=(0.0, 1.0))[0] for ch in img]
    ).astype(np.float64)
    return RgbHistogram(counts / (img.shape[1] * img.shape[2]))


def chi_square(p: RgbHistogram, q: RgbHistogram) -> float:
    """Mean over channels of sum_i (p_i - q_i)^2 / (p_i + q_i + eps)."""
    if p.bins != q.bins:
        raise ValueError(f"bin counts differ: {p.bins} vs {q.bins}")
    diff = p.counts - q.counts
    per_channel = np.sum(diff * diff / (p.counts + q.counts + CHI2_EPS), axis=1)
    return float(per_channel.mean())


@lru_cache(maxsize=8)
def _filter_bank(bank_seed: int) -> np.ndarray:
    taps = 3 * FILTER_SIZE * FILTER_SIZE
    bank = stream(bank_seed, "bank").normal(size=(FILTER_COUNT, 3, FILTER_SIZE, FILTER_SIZE))
    return _locked(bank / np.sqrt(taps))


def describe(img: np.ndarray, bank_seed: int = BANK_SEED) -> FeatureDescriptor:
    """Filter-bank responses -> content (mean/std) and style (Gram) vectors.

    The Gram is taken over mean-centered response maps: the DC response of a
    near-uniform image would otherwise swamp the texture signal. The removed
    means are kept in the content vector.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ValueError("image must be (3, H, W)")
    if img.shape[1] < FILTER_SIZE or img.shape[2] < FILTER_SIZE:
        raise ValueError(f"image smaller than {FILTER_SIZE}x{FILTER_SIZE}")
    responses = kernels.conv_bank(img, _filter_bank(bank_seed))
    flat = responses.reshape(FILTER_COUNT, -1)
    content = np.concatenate([flat.mean(axis=1), flat.std(axis=1)])
    centered = flat - flat.mean(axis=1, keepdims=True)
    gram = (centered @ centered.T) / flat.shape[1]
    iu = np.triu_indices(FILTER_COUNT)
    return FeatureDescriptor(content, gram[iu])


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; self-comparison is exactly 1, zero vectors give 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    if np.array_equal(u, v):
        return 1.0
    uu = float(u @ u)
    vv = float(v @ v)
    if uu == 0.0 or vv == 0.0:
        return 0.0
    return float((u @ v) / np.sqrt(uu * vv))


def style_consistency(images: np.ndarray, bank_seed: int = BANK_SEED) -> float:
    """Mean pairwise cosine of the batch's style vectors, fixed pair order."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 4 or images.shape[0] < 2:
        raise ValueError("need a batch (N >= 2, 3, H, W)")
    grams = [describe(img, bank_seed).gram_vector for img in images]
    n = len(grams)
    total = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            total += cosine(grams[a], grams[b])
    return total / (n * (n - 1) / 2)


def object_relevancy(
    images: np.ndarray,
    prompts: Sequence[str],
    bank_seed: int = BANK_SEED,
    embed_seed: int | None = None,
) -> float:
    """Mean cosine between each image's content vector and its prompt's
    mean embedding pushed through a fixed seeded projection.

    embed_seed defaults to bank_seed; pass the generation seed to compare an
    image against the very conditioning vector that produced it.
    """
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 4 or images.shape[0] != len(prompts):
        raise ValueError("one prompt per image required")
    if embed_seed is None:
        embed_seed = bank_seed
    content_dim = 2 * FILTER_COUNT
    total = 0.0
    proj = None
    for img, prompt in zip(images, prompts):
        emb = embed_text(prompt, embed_seed)
        if proj is None:
            text_dim = emb.embedding.shape[1]
            proj = stream(bank_seed, "obj").normal(size=(text_dim, content_dim))
            proj /= np.sqrt(text_dim)
        target = emb.embedding.mean(axis=0) @ proj
        total += cosine(target, describe(img, bank_seed).content_vector)
    return total / len(prompts)


def dual_consistency(s_obj: float, s_sty: float) -> float:
    """Harmonic mean 2ab / (a + b)."""
    if s_obj + s_sty == 0.0:
        raise ValueError("zero denominator: s_obj + s_sty must be nonzero")
    return 2.0 * s_obj * s_sty / (s_obj + s_sty)


def consistency_report(
    images: np.ndarray,
    prompts: Sequence[str],
    bank_seed: int = BANK_SEED,
    embed_seed: int | None = None,
) -> ConsistencyReport:
    s_obj = object_relevancy(images, prompts, bank_seed, embed_seed)
    s_sty = style_consistency(images, bank_seed)
    return ConsistencyReport(s_obj=s_obj, s_sty=s_sty, s_dual=dual_consistency(s_obj, s_sty))


def histogram_csv(hist: RgbHistogram) -> str:
    """CSV rows channel,bin_index,mass with '.' decimals and \\n endings."""
    lines = ["channel,bin_index,mass"]
    for ch in range(3):
        for b in range(hist.bins):
            lines.append(f"{ch},{b},{float(hist.counts[ch, b])!r}")
    return "\n".join(lines) + "\n"
