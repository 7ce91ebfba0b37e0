"""Cross-checks between the numba kernels and the vectorized numpy fallback."""
import numpy as np
import pytest

from scalestyle import generate, kernels

numba_available = kernels._HAVE_NUMBA

needs_numba = pytest.mark.skipif(not numba_available, reason="numba not installed")

RNG = np.random.default_rng(90)

PROMPTS = ["A cat on a mat", "A rose in a vase"]


def both_backends(fn):
    prev = kernels.set_backend("numpy")
    try:
        a = fn()
        kernels.set_backend("numba")
        b = fn()
    finally:
        kernels.set_backend(prev)
    return a, b


def test_backend_selection():
    assert kernels.active_backend() in ("numba", "numpy")
    with pytest.raises(ValueError, match="unknown backend"):
        kernels.set_backend("gpu")
    prev = kernels.set_backend("numpy")
    assert kernels.active_backend() == "numpy"
    kernels.set_backend(prev)


@needs_numba
def test_bilinear_bit_identical_across_backends():
    src = RNG.normal(size=(2, 3, 7, 5))
    a, b = both_backends(lambda: kernels.bilinear_resize(src, 13, 11))
    assert a.tobytes() == b.tobytes()
    down_a, down_b = both_backends(lambda: kernels.bilinear_resize(src, 3, 2))
    assert down_a.tobytes() == down_b.tobytes()


@needs_numba
def test_attend_agrees_across_backends():
    q = RNG.normal(size=(2, 40, 16))
    k = RNG.normal(size=(2, 25, 16))
    v = RNG.normal(size=(2, 25, 16))
    a, b = both_backends(lambda: kernels.attend(q, k, v))
    assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


@needs_numba
def test_conv_bank_agrees_across_backends():
    img = RNG.random(size=(3, 30, 30))
    filters = RNG.normal(size=(16, 3, 5, 5))
    a, b = both_backends(lambda: kernels.conv_bank(img, filters))
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)


@needs_numba
def test_generate_agrees_across_backends(small_gen, small_int):
    a, b = both_backends(lambda: generate(PROMPTS, small_gen, small_int).images)
    assert np.allclose(a, b, rtol=1e-9, atol=1e-9)


@needs_numba
def test_each_backend_is_deterministic(small_gen, small_int):
    for name in ("numpy", "numba"):
        prev = kernels.set_backend(name)
        try:
            a = generate(PROMPTS, small_gen, small_int).images
            b = generate(PROMPTS, small_gen, small_int).images
        finally:
            kernels.set_backend(prev)
        assert a.tobytes() == b.tobytes()


def test_backend_env_variable_controls_selection():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from scalestyle import kernels; print(kernels.active_backend())"],
        env={"PATH": "/usr/bin:/bin", "SCALESTYLE_BACKEND": "numpy"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_kernel_shape_validation():
    with pytest.raises(ValueError, match=">= 1"):
        kernels.bilinear_resize(np.zeros((1, 1, 2, 2)), 0, 2)
    with pytest.raises(ValueError, match="4-axis"):
        kernels.bilinear_resize(np.zeros((2, 2)), 2, 2)
    with pytest.raises(ValueError, match="attention shapes"):
        kernels.attend(np.zeros((2, 4, 8)), np.zeros((2, 4, 6)), np.zeros((2, 4, 6)))
    with pytest.raises(ValueError, match="inconsistent"):
        kernels.conv_bank(np.zeros((3, 8, 8)), np.zeros((4, 2, 5, 5)))
    with pytest.raises(ValueError, match="smaller"):
        kernels.conv_bank(np.zeros((3, 4, 4)), np.zeros((4, 3, 5, 5)))
