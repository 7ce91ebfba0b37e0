import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from scalestyle import GenerationConfig, InterventionConfig
from scalestyle import kernels

GOLDEN_PATH = Path(__file__).parent / "goldens.json"

SMALL_SIDES = (1, 2, 3, 4, 6, 8)

PROMPTS4 = (
    "A cat made of crayon",
    "A rose made of crayon",
    "A dragon made of crayon",
    "A robot made of crayon",
)


def array_digest(arr) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()


def bytes_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@pytest.fixture
def check_golden():
    """Record-on-first-run golden store; byte-stable values only."""

    def check(name: str, value: str) -> None:
        data = json.loads(GOLDEN_PATH.read_text()) if GOLDEN_PATH.exists() else {}
        if name not in data:
            data[name] = value
            GOLDEN_PATH.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
            return
        assert data[name] == value, f"golden '{name}' changed: {value!r} != {data[name]!r}"

    return check


@pytest.fixture
def numpy_backend():
    """Pin the unconditional backend for golden-sensitive tests."""
    prev = kernels.set_backend("numpy")
    yield
    kernels.set_backend(prev)


@pytest.fixture
def small_gen() -> GenerationConfig:
    return GenerationConfig(
        num_steps=6,
        scale_schedule=tuple((s, s) for s in SMALL_SIDES),
        channels=8,
        full_res=(32, 32),
        seed=11,
    )


@pytest.fixture
def small_int() -> InterventionConfig:
    return InterventionConfig(
        early_steps=frozenset({1, 2}),
        mid_steps=frozenset({3, 4}),
        pivot_step=3,
    )
