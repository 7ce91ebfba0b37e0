"""Output plumbing: PNG encoding, image grids, run ids, manifests."""
from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from PIL import Image

from .types import GenerationConfig, InterventionConfig, configs_to_dict


def to_uint8(img: np.ndarray) -> np.ndarray:
    """(3, H, W) floats in [0, 1] -> (H, W, 3) uint8 via round(255 * v)."""
    arr = np.clip(np.round(255.0 * np.asarray(img)), 0, 255).astype(np.uint8)
    return arr.transpose(1, 2, 0)


def save_png(img: np.ndarray, path: str | Path) -> None:
    Image.fromarray(to_uint8(img), mode="RGB").save(path, format="PNG")


def grid_image(images: np.ndarray, gutter: int = 2) -> np.ndarray:
    """Concatenate a batch left to right with a white gutter, as (3, H, W')."""
    images = np.asarray(images)
    n, _, h, w = images.shape
    total_w = n * w + gutter * (n - 1)
    grid = np.ones((3, h, total_w))
    for idx in range(n):
        x0 = idx * (w + gutter)
        grid[:, :, x0 : x0 + w] = images[idx]
    return grid


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def run_id(g: GenerationConfig, i: InterventionConfig, prompts: Sequence[str]) -> str:
    """Stable 16-hex id of (configs, prompts)."""
    payload = canonical_json({"config": configs_to_dict(g, i), "prompts": list(prompts)})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def build_manifest(
    g: GenerationConfig,
    i: InterventionConfig,
    prompts: Sequence[str],
    outputs: Sequence[str],
    per_image_seconds: float | None,
    stable: bool = False,
) -> dict[str, Any]:
    """Manifest for one generation run.

    stable=True drops the wall-clock fields (timestamp, seconds) so two runs
    with identical arguments write byte-identical manifests.
    """
    return {
        "run_id": run_id(g, i, prompts),
        "timestamp": None if stable else datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "generation": configs_to_dict(g, i)["generation"],
        "intervention": configs_to_dict(g, i)["intervention"],
        "prompts": list(prompts),
        "outputs": list(outputs),
        "per_image_seconds": None if stable else per_image_seconds,
    }


def write_manifest(path: str | Path, manifest: dict[str, Any]) -> None:
    Path(path).write_text(canonical_json(manifest))
