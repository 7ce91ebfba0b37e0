"""Generative backend: text-embedding stub, tiny transformer, toy decoder.

All weights are drawn once from the run seed, so a (seed, config, prompts)
triple pins every output bit in greedy mode. Attention never mixes batch
members; cross-image influence enters only through the value hook installed
by the engine.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .pyramid import BinaryQuantizer, quantize
from .rng import stream, token_hash
from .types import FeatureMap, GenerationConfig, PromptEmbedding, ResidualMap, _locked

ValueHookFn = Callable[[np.ndarray], np.ndarray]

_LN_EPS = 1e-6


@dataclass(frozen=True)
class Architecture:
    """Transformer shape; deliberately tiny so a full run stays sub-second."""

    layers: int = 2
    heads: int = 2
    model_dim: int = 32
    text_dim: int = 32
    mlp_dim: int = 64

    def __post_init__(self):
        if self.model_dim % self.heads != 0:
            raise ValueError("model_dim must be divisible by heads")

    @property
    def head_dim(self) -> int:
        return self.model_dim // self.heads


@dataclass(frozen=True)
class LayerWeights:
    sa_q: np.ndarray
    sa_k: np.ndarray
    sa_v: np.ndarray
    sa_o: np.ndarray
    ca_q: np.ndarray
    ca_k: np.ndarray
    ca_v: np.ndarray
    ca_o: np.ndarray
    mlp_in: np.ndarray
    mlp_out: np.ndarray


@dataclass(frozen=True)
class TransformerWeights:
    """Every parameter tensor, fully determined by (seed, architecture, grids)."""

    arch: Architecture
    seed: int
    channels: int
    bit_depth: int
    scale_schedule: tuple[tuple[int, int], ...]
    in_proj: np.ndarray
    scale_emb: np.ndarray
    pos_tables: tuple[np.ndarray, ...]
    layers: tuple[LayerWeights, ...]
    head: np.ndarray

    @property
    def num_steps(self) -> int:
        return len(self.scale_schedule)


def build_weights(g: GenerationConfig, arch: Architecture = Architecture()) -> TransformerWeights:
    """Draw all weights from per-tensor streams of the run seed."""
    d = arch.model_dim
    bound = 1.0 / math.sqrt(d)

    def draw(name: str, shape: tuple[int, ...]) -> np.ndarray:
        return _locked(stream(g.seed, "w", name).uniform(-bound, bound, size=shape))

    layers = []
    for li in range(arch.layers):
        layers.append(
            LayerWeights(
                sa_q=draw(f"l{li}.sa_q", (d, d)),
                sa_k=draw(f"l{li}.sa_k", (d, d)),
                sa_v=draw(f"l{li}.sa_v", (d, d)),
                sa_o=draw(f"l{li}.sa_o", (d, d)),
                ca_q=draw(f"l{li}.ca_q", (d, d)),
                ca_k=draw(f"l{li}.ca_k", (arch.text_dim, d)),
                ca_v=draw(f"l{li}.ca_v", (arch.text_dim, d)),
                ca_o=draw(f"l{li}.ca_o", (d, d)),
                mlp_in=draw(f"l{li}.mlp_in", (d, arch.mlp_dim)),
                mlp_out=draw(f"l{li}.mlp_out", (arch.mlp_dim, d)),
            )
        )
    pos_tables = tuple(
        draw(f"pos{s}", (h * w, d)) for s, (h, w) in enumerate(g.scale_schedule, start=1)
    )
    return TransformerWeights(
        arch=arch,
        seed=g.seed,
        channels=g.channels,
        bit_depth=g.channels,
        scale_schedule=g.scale_schedule,
        in_proj=draw("in_proj", (g.channels, d)),
        scale_emb=draw("scale_emb", (g.num_steps, d)),
        pos_tables=pos_tables,
        layers=tuple(layers),
        head=draw("head", (d, g.channels)),
    )


def embed_text(prompt: str, seed: int, dim: int = 32) -> PromptEmbedding:
    """Whitespace-split words, hashed; one Gaussian row per token, keyed by hash."""
    words = prompt.split()
    if not words:
        raise ValueError("empty prompt")
    hashes = tuple(token_hash(word) for word in words)
    rows = np.stack([stream(seed, "tok", h).normal(size=dim) for h in hashes])
    return PromptEmbedding(hashes, rows)


def sos_features(g: GenerationConfig, embeds: Sequence[PromptEmbedding]) -> FeatureMap:
    """Start-of-run features: mean prompt row through a fixed seeded projection."""
    h1, w1 = g.scale_schedule[0]
    text_dim = embeds[0].embedding.shape[1]
    if any(e.embedding.shape[1] != text_dim for e in embeds):
        raise ValueError("prompt embeddings must share one width")
    proj = stream(g.seed, "sos").normal(size=(text_dim, g.channels * h1 * w1))
    proj /= math.sqrt(text_dim)
    rows = [e.embedding.mean(axis=0) @ proj for e in embeds]
    data = np.stack(rows).reshape(len(embeds), g.channels, h1, w1)
    return FeatureMap.wrap(data)


def _layer_norm(x: np.ndarray) -> np.ndarray:
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + _LN_EPS)


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    """(..., T, D) -> (..., heads, T, D/heads)."""
    t, d = x.shape[-2], x.shape[-1]
    parts = x.reshape(x.shape[:-2] + (t, heads, d // heads))
    return np.moveaxis(parts, -2, -3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    moved = np.moveaxis(x, -3, -2)
    return moved.reshape(moved.shape[:-2] + (moved.shape[-2] * moved.shape[-1],))


def forward_step(
    f_prev: FeatureMap,
    embeds: Sequence[PromptEmbedding],
    w: TransformerWeights,
    s: int,
    hook: ValueHookFn | None = None,
) -> FeatureMap:
    """One next-scale prediction: token grid in, per-channel logits out.

    Pre-norm blocks: self-attention (values through the hook when given),
    cross-attention over the image's own prompt tokens, then an MLP. The
    output head emits bit_depth logit channels on the step-s grid.
    """
    if not 1 <= s <= w.num_steps:
        raise ValueError(f"step {s} out of range 1..{w.num_steps}")
    h, wd = w.scale_schedule[s - 1]
    if f_prev.spatial != (h, wd):
        raise ValueError(f"step {s} expects spatial {(h, wd)}, got {f_prev.spatial}")
    if f_prev.channels != w.channels:
        raise ValueError(f"expected {w.channels} channels, got {f_prev.channels}")
    n = f_prev.batch
    if len(embeds) != n:
        raise ValueError("one prompt embedding per batch member required")

    arch = w.arch
    t = h * wd
    tokens = f_prev.data.reshape(n, w.channels, t).transpose(0, 2, 1)
    x = tokens @ w.in_proj + w.pos_tables[s - 1][None] + w.scale_emb[s - 1][None, None]

    for lw in w.layers:
        hn = _layer_norm(x)
        q = _split_heads(hn @ lw.sa_q, arch.heads)
        k = _split_heads(hn @ lw.sa_k, arch.heads)
        v = _split_heads(hn @ lw.sa_v, arch.heads)
        if hook is not None:
            v = np.asarray(hook(v), dtype=np.float64)
            if v.shape != q.shape:
                raise ValueError("value hook must preserve the (N, heads, T, d) shape")
        att = np.empty_like(q)
        for bi in range(n):
            att[bi] = kernels.attend(q[bi], k[bi], v[bi])
        x = x + _merge_heads(att) @ lw.sa_o

        hn = _layer_norm(x)
        qc = _split_heads(hn @ lw.ca_q, arch.heads)
        catt = np.empty_like(qc)
        for bi in range(n):
            kc = _split_heads(embeds[bi].embedding @ lw.ca_k, arch.heads)
            vc = _split_heads(embeds[bi].embedding @ lw.ca_v, arch.heads)
            catt[bi] = kernels.attend(qc[bi], kc, vc)
        x = x + _merge_heads(catt) @ lw.ca_o

        hn = _layer_norm(x)
        x = x + np.tanh(hn @ lw.mlp_in) @ lw.mlp_out

    logits = _layer_norm(x) @ w.head
    return FeatureMap.wrap(logits.transpose(0, 2, 1).reshape(n, w.bit_depth, h, wd))


def sample_residual(
    logits: FeatureMap,
    mode: str,
    temperature: float,
    seed: int,
    s: int,
    quantizer: BinaryQuantizer,
) -> ResidualMap:
    """Turn logits into a codeword map.

    greedy: sign per channel (ties go positive). seeded-stochastic: per-element
    Bernoulli(sigmoid(logit / temperature)) on the (seed, step, member) stream,
    so element (c, y, x) is pinned by its counter position alone.
    """
    if mode == "greedy":
        return quantize(logits, quantizer, s)
    if mode != "seeded-stochastic":
        raise ValueError(f"unknown sampling mode '{mode}'")
    if not temperature > 0:
        raise ValueError("temperature must be > 0 in seeded-stochastic mode")
    if logits.channels != quantizer.bit_depth:
        raise ValueError(
            f"channel count {logits.channels} does not match quantizer bit depth "
            f"{quantizer.bit_depth}"
        )
    z = logits.data / temperature
    damp = np.exp(-np.abs(z))  # <= 1, so no overflow at extreme temperatures
    prob = np.where(z >= 0, 1.0 / (1.0 + damp), damp / (1.0 + damp))
    data = np.empty_like(logits.data)
    for bi in range(logits.batch):
        u = stream(seed, "samp", s, bi + 1).random(size=logits.data.shape[1:])
        data[bi] = np.where(u < prob[bi], quantizer.magnitude, -quantizer.magnitude)
    return ResidualMap(data, s)


def decode(f_final: FeatureMap, g: GenerationConfig, upscale: bool = True) -> np.ndarray:
    """Features to RGB in [0, 1]: seeded 1x1 projection, logistic squash,
    then bilinear pixel upsampling (skipped when upscale is False)."""
    if f_final.spatial != g.feature_hw:
        raise ValueError(f"decoder expects spatial {g.feature_hw}, got {f_final.spatial}")
    if f_final.channels != g.channels:
        raise ValueError(f"decoder expects {g.channels} channels, got {f_final.channels}")
    gen = stream(g.seed, "dec")
    # Accumulated features are sums of num_steps unit-magnitude residuals, so
    # normalize the projection by sqrt(channels * steps) to keep the logistic
    # in its responsive range instead of railing to 0/1.
    proj = gen.normal(size=(g.channels, 3)) / math.sqrt(g.channels * g.num_steps)
    bias = 0.5 * gen.normal(size=3)
    mixed = np.tensordot(f_final.data, proj, axes=([1], [0]))  # (N, h, w, 3)
    z = np.moveaxis(mixed, -1, 1) + bias[None, :, None, None]
    rgb = 1.0 / (1.0 + np.exp(-z))
    if upscale:
        rgb = kernels.bilinear_resize(rgb, g.full_res[0], g.full_res[1])
    return _locked(np.ascontiguousarray(rgb))


# --- persistence -------------------------------------------------------------
#
# Flat little-endian float64 binary plus a JSON sidecar naming each tensor,
# its shape, and its element offset.


def _named_arrays(w: TransformerWeights) -> list[tuple[str, np.ndarray]]:
    entries = [("in_proj", w.in_proj), ("scale_emb", w.scale_emb)]
    entries += [(f"pos{s}", tab) for s, tab in enumerate(w.pos_tables, start=1)]
    for li, lw in enumerate(w.layers):
        for field in ("sa_q", "sa_k", "sa_v", "sa_o", "ca_q", "ca_k", "ca_v", "ca_o",
                      "mlp_in", "mlp_out"):
            entries.append((f"l{li}.{field}", getattr(lw, field)))
    entries.append(("head", w.head))
    return entries


def save_weights(w: TransformerWeights, base: str | Path) -> tuple[Path, Path]:
    """Write <base>.bin and <base>.json; returns both paths."""
    base = Path(base)
    bin_path = base.with_suffix(".bin")
    json_path = base.with_suffix(".json")
    arrays = _named_arrays(w)
    offset = 0
    manifest = []
    with open(bin_path, "wb") as fh:
        for name, arr in arrays:
            fh.write(arr.astype("<f8").tobytes())
            manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
            offset += arr.size
    sidecar = {
        "dtype": "<f8",
        "seed": w.seed,
        "channels": w.channels,
        "bit_depth": w.bit_depth,
        "scale_schedule": [list(hw) for hw in w.scale_schedule],
        "arch": {
            "layers": w.arch.layers,
            "heads": w.arch.heads,
            "model_dim": w.arch.model_dim,
            "text_dim": w.arch.text_dim,
            "mlp_dim": w.arch.mlp_dim,
        },
        "arrays": manifest,
    }
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return bin_path, json_path


def load_weights(base: str | Path) -> TransformerWeights:
    base = Path(base)
    sidecar = json.loads(base.with_suffix(".json").read_text())
    flat = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype=sidecar["dtype"])
    arrays = {}
    for entry in sidecar["arrays"]:
        size = int(np.prod(entry["shape"]))
        chunk = flat[entry["offset"] : entry["offset"] + size]
        arrays[entry["name"]] = _locked(
            chunk.astype(np.float64).reshape(entry["shape"])
        )
    arch = Architecture(**sidecar["arch"])
    schedule = tuple((int(h), int(wd)) for h, wd in sidecar["scale_schedule"])
    layers = tuple(
        LayerWeights(**{f: arrays[f"l{li}.{f}"] for f in (
            "sa_q", "sa_k", "sa_v", "sa_o", "ca_q", "ca_k", "ca_v", "ca_o",
            "mlp_in", "mlp_out")})
        for li in range(arch.layers)
    )
    return TransformerWeights(
        arch=arch,
        seed=sidecar["seed"],
        channels=sidecar["channels"],
        bit_depth=sidecar["bit_depth"],
        scale_schedule=schedule,
        in_proj=arrays["in_proj"],
        scale_emb=arrays["scale_emb"],
        pos_tables=tuple(arrays[f"pos{s}"] for s in range(1, len(schedule) + 1)),
        layers=layers,
        head=arrays["head"],
    )
