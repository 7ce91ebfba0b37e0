#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times each hot kernel on generation-sized inputs plus one end-to-end batch,
for both backends, and prints a table with speedups. Usage:

    python bench/benchmark_backends.py [--repeat N]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from scalestyle import GenerationConfig, InterventionConfig, generate, kernels


def timeit(fn, repeat: int) -> float:
    fn()  # warm-up (and JIT compile on the numba path)
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def build_cases():
    rng = np.random.default_rng(0)
    src = rng.normal(size=(4, 16, 12, 12))
    q = rng.normal(size=(2, 1024, 16))
    k = rng.normal(size=(2, 1024, 16))
    v = rng.normal(size=(2, 1024, 16))
    img = rng.random(size=(3, 128, 128))
    filters = rng.normal(size=(16, 3, 5, 5))
    g = GenerationConfig()
    i = InterventionConfig()
    prompts = ["A cat", "A rose", "A dragon", "A robot"]
    return [
        ("bilinear 12->32", lambda: kernels.bilinear_resize(src, 32, 32)),
        ("attend T=1024", lambda: kernels.attend(q, k, v)),
        ("conv_bank 128px", lambda: kernels.conv_bank(img, filters)),
        ("generate batch=4", lambda: generate(prompts, g, i)),
    ]


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if not kernels._HAVE_NUMBA:
        print("numba unavailable; only the numpy fallback can be timed")

    results = {}
    backends = ["numpy"] + (["numba"] if kernels._HAVE_NUMBA else [])
    for backend in backends:
        prev = kernels.set_backend(backend)
        try:
            for name, fn in build_cases():
                results[(backend, name)] = timeit(fn, args.repeat)
        finally:
            kernels.set_backend(prev)

    print(f"{'case':<20} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for name, _ in build_cases():
        t_np = results[("numpy", name)]
        if ("numba", name) in results:
            t_nb = results[("numba", name)]
            print(f"{name:<20} {t_np:>9.4f}s {t_nb:>9.4f}s {t_np / t_nb:>8.2f}x")
        else:
            print(f"{name:<20} {t_np:>9.4f}s {'-':>10} {'-':>9}")


if __name__ == "__main__":
    main()
