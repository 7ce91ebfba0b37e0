import numpy as np

from scalestyle.rng import fold, splitmix64, stream, token_hash


def test_splitmix64_reference_vector():
    # First output of the reference splitmix64 sequence seeded with 0.
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_token_hash_stable_and_distinct():
    assert token_hash("cat") == token_hash("cat")
    assert token_hash("cat") != token_hash("Cat")
    assert 0 <= token_hash("cat") < 2**64


def test_fold_order_sensitive():
    assert fold("a", "b") != fold("b", "a")
    assert fold(1, 2) != fold(2, 1)
    assert fold("x") != fold("x", 0)


def test_stream_reproducible():
    a = stream(7, "tok", 123).normal(size=8)
    b = stream(7, "tok", 123).normal(size=8)
    assert np.array_equal(a, b)


def test_streams_independent():
    a = stream(7, "tok", 1).normal(size=8)
    b = stream(7, "tok", 2).normal(size=8)
    c = stream(8, "tok", 1).normal(size=8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_draw_split_matches_whole():
    g = stream(3, "samp", 5, 1)
    whole = g.random(size=16)
    again = stream(3, "samp", 5, 1).random(size=16)
    assert np.array_equal(whole, again)
