import numpy as np
import pytest

from scalestyle import (
    BinaryQuantizer,
    FeatureMap,
    GenerationConfig,
    Pyramid,
    ResidualMap,
    accumulate,
    quantize,
    resize_for_step,
    up,
)
from oracles import bilinear_reference, resum_pyramid

RNG = np.random.default_rng(2024)


def fm(arr) -> FeatureMap:
    return FeatureMap(np.asarray(arr, dtype=float))


def test_up_identity_is_bit_exact():
    f = fm(RNG.normal(size=(2, 3, 4, 4)))
    out = up(f, (4, 4))
    assert out.data.tobytes() == f.data.tobytes()


def test_up_preserves_constants_exactly():
    f = fm(np.full((1, 2, 3, 3), 0.7))
    for target in [(1, 1), (3, 3), (5, 7), (8, 2)]:
        assert np.all(up(f, target).data == 0.7)


def test_up_ramp_matches_closed_form():
    # 2x2 ramp [[0, 1], [2, 3]] is the restriction of 2y + x; align-corners
    # bilinear reproduces that plane at any resolution.
    f = fm(np.array([[0.0, 1.0], [2.0, 3.0]]).reshape(1, 1, 2, 2))
    out = up(f, (4, 4)).data[0, 0]
    ys = np.linspace(0.0, 1.0, 4)[:, None]
    xs = np.linspace(0.0, 1.0, 4)[None, :]
    assert np.allclose(out, 2.0 * ys + xs, rtol=0, atol=1e-15)
    ref = bilinear_reference(f.data, 4, 4)
    assert np.allclose(up(f, (4, 4)).data, ref, rtol=0, atol=1e-12)


def test_up_matches_reference_on_random_sizes():
    for _ in range(5):
        h, w = RNG.integers(1, 7, size=2)
        oh, ow = RNG.integers(1, 9, size=2)
        f = fm(RNG.normal(size=(2, 2, h, w)))
        assert np.allclose(
            up(f, (int(oh), int(ow))).data,
            bilinear_reference(f.data, int(oh), int(ow)),
            rtol=0,
            atol=1e-12,
        )


def test_up_corner_samples_map_to_corner_samples():
    f = fm(RNG.normal(size=(1, 1, 3, 5)))
    out = up(f, (9, 11)).data[0, 0]
    src = f.data[0, 0]
    assert out[0, 0] == src[0, 0]
    assert out[0, -1] == src[0, -1]
    assert out[-1, 0] == src[-1, 0]
    assert out[-1, -1] == src[-1, -1]


def test_up_is_linear():
    x = RNG.normal(size=(1, 2, 3, 4))
    y = RNG.normal(size=(1, 2, 3, 4))
    a, b = 1.7, -0.4
    lhs = up(fm(a * x + b * y), (7, 9)).data
    rhs = a * up(fm(x), (7, 9)).data + b * up(fm(y), (7, 9)).data
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_up_rejects_bad_targets():
    f = fm(np.zeros((1, 1, 2, 2)))
    with pytest.raises(ValueError, match=">= 1"):
        up(f, (0, 4))
    with pytest.raises(ValueError, match=">= 1"):
        up(f, (4, -1))


def test_quantize_sign_rule_and_tie():
    q = BinaryQuantizer(bit_depth=1)
    f = fm(np.array([0.3, -0.2, 0.0, -0.0]).reshape(1, 1, 2, 2))
    out = quantize(f, q).data[0, 0]
    assert np.array_equal(out, [[1.0, -1.0], [1.0, 1.0]])


def test_quantize_idempotent_and_codeword_valued():
    q = BinaryQuantizer(bit_depth=4, magnitude=2.5)
    f = fm(RNG.normal(size=(2, 4, 3, 3)))
    once = quantize(f, q)
    twice = quantize(FeatureMap(once.data), q)
    assert once.data.tobytes() == twice.data.tobytes()
    assert np.all(np.isin(once.data, [-2.5, 2.5]))


def test_quantize_channel_mismatch():
    q = BinaryQuantizer(bit_depth=3)
    with pytest.raises(ValueError, match="bit depth"):
        quantize(fm(np.zeros((1, 2, 2, 2))), q)


def test_quantizer_field_validation():
    with pytest.raises(ValueError):
        BinaryQuantizer(bit_depth=0)
    with pytest.raises(ValueError):
        BinaryQuantizer(magnitude=0.0)


def test_accumulate_single_term():
    p = Pyramid.empty(1, 2, 4, 4)
    r = ResidualMap(RNG.normal(size=(1, 2, 4, 4)), 1)
    p = accumulate(p, r)
    assert np.array_equal(p.accumulated.data, r.data)


def test_accumulate_cancellation():
    p = Pyramid.empty(1, 1, 4, 4)
    p = accumulate(p, ResidualMap(np.full((1, 1, 2, 2), 0.5), 1))
    p = accumulate(p, ResidualMap(np.full((1, 1, 4, 4), -0.5), 2))
    assert np.all(p.accumulated.data == 0.0)


def test_accumulate_matches_brute_force_resummation():
    p = Pyramid.empty(2, 3, 8, 8)
    for s, side in enumerate((2, 4, 8), start=1):
        p = accumulate(p, ResidualMap(RNG.normal(size=(2, 3, side, side)), s))
    ref = resum_pyramid(p.residuals, (8, 8))
    assert np.allclose(p.accumulated.data, ref, rtol=0, atol=1e-12)
    assert len(p.residuals) == 3


def test_accumulate_rejects_out_of_order_scales():
    p = Pyramid.empty(1, 1, 4, 4)
    with pytest.raises(ValueError, match="out-of-order"):
        accumulate(p, ResidualMap(np.zeros((1, 1, 2, 2)), 2))


def test_with_accumulated_keeps_shape():
    p = Pyramid.empty(1, 1, 4, 4)
    with pytest.raises(ValueError, match="shape"):
        p.with_accumulated(fm(np.zeros((1, 1, 2, 2))))


def test_resize_for_step():
    g = GenerationConfig()
    f = fm(np.full((2, 16, 32, 32), 0.25))
    out = resize_for_step(f, 3, g)
    assert out.spatial == g.scale_schedule[2]
    assert np.all(out.data == 0.25)
    ident = resize_for_step(f, g.num_steps, g)
    assert ident.data.tobytes() == f.data.tobytes()
    with pytest.raises(ValueError, match="range"):
        resize_for_step(f, 13, g)
    with pytest.raises(ValueError, match="range"):
        resize_for_step(f, 0, g)
