from dataclasses import replace

import numpy as np
import pytest

import scalestyle.engine as engine_mod
from scalestyle import GenerationConfig, generate, generate_pair
from oracles import vanilla_generate

PROMPTS = ["A cat on a mat", "A rose in a vase", "A fox in socks"]


def test_noop_matches_vanilla_loop(small_gen, small_int):
    for seed in (0, 5):
        g = replace(small_gen, seed=seed)
        got = generate(PROMPTS, g, small_int.disabled()).images
        want = vanilla_generate(PROMPTS, g)
        assert got.tobytes() == want.tobytes()


def test_identical_prompts_give_identical_images(small_gen, small_int):
    res = generate(["A cat"] * 3, small_gen, small_int)
    assert res.images[0].tobytes() == res.images[1].tobytes()
    assert res.images[0].tobytes() == res.images[2].tobytes()


def test_replacement_equalizes_early_accumulated_rows(small_gen, small_int):
    res = generate(["A cat", "A rose", "A fox", "A hen"], small_gen, small_int, trace=True)
    for s in sorted(small_int.early_steps):
        snap = res.snapshots[s - 1].data
        for n in range(1, snap.shape[0]):
            assert snap[n].tobytes() == snap[0].tobytes()
    after = res.snapshots[max(small_int.early_steps)].data  # first un-replaced step
    assert not np.array_equal(after[0], after[1])


def test_trace_snapshot_count(small_gen, small_int):
    res = generate(PROMPTS, small_gen, small_int, trace=True)
    assert len(res.snapshots) == small_gen.num_steps
    assert generate(PROMPTS, small_gen, small_int).snapshots is None


def test_generate_is_deterministic(small_gen, small_int):
    a = generate(PROMPTS, small_gen, small_int, trace=True)
    b = generate(PROMPTS, small_gen, small_int, trace=True)
    assert a.images.tobytes() == b.images.tobytes()
    for sa, sb in zip(a.snapshots, b.snapshots):
        assert sa.data.tobytes() == sb.data.tobytes()


def test_generate_pair_noop_configs_bit_identical(small_gen, small_int):
    off = small_int.disabled()
    base, edited = generate_pair(PROMPTS, small_gen, off)
    assert base.tobytes() == edited.tobytes()

    # Edits configured but with no-op strengths: pivot at alpha 0, others off.
    noop = replace(
        small_int,
        enable_replacement=False,
        enable_injection=False,
        enable_pivot=True,
        alpha_pivot=0.0,
    )
    base2, edited2 = generate_pair(PROMPTS, small_gen, noop)
    assert base2.tobytes() == edited2.tobytes()


def test_generate_pair_differs_with_edits_on(small_gen, small_int):
    base, edited = generate_pair(PROMPTS, small_gen, small_int)
    assert base.tobytes() != edited.tobytes()


def test_anchor_row_fixed_when_untouched(small_gen, small_int):
    # Replacement rewrites every row including the anchor's future inputs;
    # with it off, the anchor image must be identical in both runs.
    cfg = replace(small_int, enable_replacement=False)
    base, edited = generate_pair(PROMPTS, small_gen, cfg)
    assert base[0].tobytes() == edited[0].tobytes()
    assert base[1].tobytes() != edited[1].tobytes()


def test_step_counts(monkeypatch, small_gen, small_int):
    calls = {"forward": 0, "pivot": 0, "hooks": 0}

    real_forward = engine_mod.forward_step
    real_pivot = engine_mod.pivotal_interpolate
    real_hook = engine_mod.ValueHook

    def counting_forward(*args, **kwargs):
        calls["forward"] += 1
        return real_forward(*args, **kwargs)

    def counting_pivot(*args, **kwargs):
        calls["pivot"] += 1
        return real_pivot(*args, **kwargs)

    class CountingHook(real_hook):
        def __init__(self, *args, **kwargs):
            calls["hooks"] += 1
            super().__init__(*args, **kwargs)

    monkeypatch.setattr(engine_mod, "forward_step", counting_forward)
    monkeypatch.setattr(engine_mod, "pivotal_interpolate", counting_pivot)
    monkeypatch.setattr(engine_mod, "ValueHook", CountingHook)

    generate(PROMPTS, small_gen, small_int)
    assert calls["forward"] == small_gen.num_steps
    assert calls["pivot"] == 1
    assert calls["hooks"] == len(small_int.mid_steps)


def test_non_finite_intermediate_names_the_step(monkeypatch, small_gen, small_int):
    # Two saturating residuals overflow the accumulated map at step 4; the
    # run must abort with a diagnostic naming that step.
    real_sample = engine_mod.sample_residual

    def poisoned(logits, mode, temperature, seed, s, quantizer):
        r = real_sample(logits, mode, temperature, seed, s, quantizer)
        if s in (3, 4):
            from scalestyle.types import ResidualMap

            return ResidualMap(np.full_like(r.data, 1e308), s)
        return r

    monkeypatch.setattr(engine_mod, "sample_residual", poisoned)
    with np.errstate(over="ignore"), pytest.raises(
        ValueError, match="non-finite intermediate at step 4"
    ):
        generate(PROMPTS, small_gen, small_int.disabled())


def test_input_validation(small_gen, small_int):
    with pytest.raises(ValueError, match="prompt"):
        generate([], small_gen, small_int)
    with pytest.raises(ValueError, match="anchor_index"):
        generate(["A cat"], small_gen, replace(small_int, anchor_index=2))


def test_default_configs_used_when_omitted():
    res = generate(["A cat", "A dog"], GenerationConfig(num_steps=12), None)
    assert res.images.shape == (2, 3, 128, 128)


def test_invalid_config_rejected(small_int):
    bad = GenerationConfig(num_steps=2, scale_schedule=((1, 1), (2, 2)))
    with pytest.raises(Exception):
        generate(["A cat"], bad, small_int)
