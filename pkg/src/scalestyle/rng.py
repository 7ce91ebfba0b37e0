"""Deterministic randomness: one 64-bit root seed, counter-based streams.

Every random draw in the package comes from a Philox generator keyed by
(root seed, stream label). Labels are folded to 64 bits with a splitmix64
chain, so any stream can be reopened independently of draw order elsewhere.
"""
from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 scramble (public-domain finalizer constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def token_hash(word: str) -> int:
    """Stable 64-bit hash of a token; platform and process independent."""
    digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def fold(*parts: int | str) -> int:
    """Fold a label path (ints and strings) into one 64-bit stream id."""
    acc = 0
    for part in parts:
        if isinstance(part, str):
            part = token_hash(part)
        acc = splitmix64(acc ^ (int(part) & _MASK64))
    return acc


def stream(seed: int, *path: int | str) -> np.random.Generator:
    """Counter-based generator for the (seed, *path) stream.

    Same arguments always give the same draw sequence; distinct paths give
    independent streams under the same root seed.
    """
    key = np.array([seed & _MASK64, fold(*path)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
