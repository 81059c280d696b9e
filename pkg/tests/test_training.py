import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechfm.model import ModelConfig, build_model, count_params
from speechfm.numeric import ConfigError, SeededRng, ShapeError, Tensor, cross_entropy
from speechfm.training import (
    IGNORE_ID,
    Adam,
    AdamMoments,
    DivergenceError,
    ToyTask,
    ToyTaskConfig,
    WarmupSchedule,
    adam_step,
    compare_encoders,
    equalize_budget,
    lr_at_step,
    make_batch,
    train_loop,
    write_trace_csv,
)

TINY = ModelConfig(encoder_type="transformer", enc_layers=1, dec_layers=1, hidden=16, heads=2, conv_kernel=3, merge_kernel=3, cgmlp_expansion=2)
TINY_TASK = ToyTaskConfig(n_train=8, n_val=4, n_frames=48, min_symbols=3, max_symbols=3, min_dur=8, max_dur=8)

# schedule --------------------------------------------------------------------


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.mark.parametrize("peak", [2e-4, 5e-4, 1e-3])
def test_schedule_fixed_points(peak):
    s = WarmupSchedule(peak_lr=peak)
    assert lr_at_step(0, s) == 0.0
    assert rel(lr_at_step(30_000, s), 5e-5) <= 1e-12
    assert rel(lr_at_step(60_000, s), peak) <= 1e-12


def test_schedule_midpoint_of_second_ramp():
    assert rel(lr_at_step(45_000, WarmupSchedule()), 1.25e-4) <= 1e-12
    assert rel(lr_at_step(15_000, WarmupSchedule()), 2.5e-5) <= 1e-12


@pytest.mark.parametrize("peak", [2e-4, 5e-4, 1e-3])
def test_schedule_monotone_through_warmup(peak):
    s = WarmupSchedule(peak_lr=peak)
    lrs = np.array([lr_at_step(k, s) for k in range(0, 60_001)])
    assert np.all(np.diff(lrs) > 0)


@pytest.mark.parametrize("peak", [2e-4, 5e-4, 1e-3])
def test_schedule_continuous_at_knees(peak):
    s = WarmupSchedule(peak_lr=peak)
    slope = max(s.knee_lr / s.knee_step, (s.peak_lr - s.knee_lr) / (s.peak_step - s.knee_step))
    for k in (s.knee_step, s.peak_step):
        for d in (-1, 1):
            assert abs(lr_at_step(k + d, s) - lr_at_step(k, s)) <= slope * (1 + 1e-9)


def test_schedule_decays_after_peak():
    s = WarmupSchedule()
    lrs = [lr_at_step(k, s) for k in range(60_000, 61_000)]
    assert all(b < a for a, b in zip(lrs, lrs[1:]))
    assert rel(lr_at_step(260_000, s), 1e-4) <= 1e-9  # one half-life


def test_schedule_rejects_bad_constants():
    with pytest.raises(ConfigError):
        WarmupSchedule(knee_step=100, peak_step=50)
    with pytest.raises(ConfigError):
        WarmupSchedule(knee_lr=1e-3, peak_lr=1e-4)
    with pytest.raises(ConfigError):
        WarmupSchedule(decay_rate=1.0)
    with pytest.raises(ValueError):
        lr_at_step(-1, WarmupSchedule())


@settings(max_examples=50, deadline=None)
@given(st.integers(4, 5000), st.floats(1e-5, 1e-1))
def test_scaled_schedule_keeps_shape(total, peak):
    s = WarmupSchedule.scaled(total, peak)
    assert s(0) == 0.0
    assert rel(s(s.peak_step), peak) <= 1e-12
    assert s.knee_lr < s.peak_lr


# adam ------------------------------------------------------------------------


def test_adam_zero_gradient_is_a_no_op():
    p = [np.arange(6, dtype=np.float32).reshape(2, 3)]
    out, mom = adam_step(p, [np.zeros((2, 3))], AdamMoments.zeros_like(p), lr=0.1)
    np.testing.assert_array_equal(out[0], p[0])
    assert mom.t == 1


def test_adam_first_step_moves_by_lr():
    # bias correction makes the first update lr * sign(g)
    p = [np.zeros(3, np.float32)]
    out, _ = adam_step(p, [np.array([2.0, -0.5, 1e-3])], AdamMoments.zeros_like(p), lr=0.01)
    np.testing.assert_allclose(out[0], [-0.01, 0.01, -0.01], rtol=1e-5)


def test_adam_converges_on_quadratic():
    target = np.array([1.5, -2.0, 0.25])
    x = [np.zeros(3, np.float64)]
    mom = AdamMoments.zeros_like(x)
    for t in range(500):
        x, mom = adam_step(x, [2 * (x[0] - target)], mom, lr=0.1 * 0.99**t)
        assert all(np.isfinite(m).all() for m in mom.m + mom.v)
    assert np.max(np.abs(x[0] - target)) < 1e-3


def test_adam_shape_mismatch():
    p = [np.zeros(3)]
    with pytest.raises(ShapeError):
        adam_step(p, [np.zeros(4)], AdamMoments.zeros_like(p), lr=0.1)


def test_adam_optimizer_treats_missing_grad_as_zero():
    model = build_model(TINY, 0)
    before = [p.data.copy() for p in model.parameters()]
    opt = Adam(model.parameters())
    opt.zero_grad()
    opt.step(0.1)
    for b, p in zip(before, model.parameters()):
        np.testing.assert_array_equal(b, p.data)


# toy task --------------------------------------------------------------------


def test_toy_task_deterministic():
    a, b = ToyTask(TINY_TASK), ToyTask(TINY_TASK)
    for x, y in zip(a.train + a.val, b.train + b.val):
        assert x.text == y.text
        np.testing.assert_array_equal(x.features, y.features)


def test_toy_task_seed_changes_data():
    a = ToyTask(TINY_TASK)
    b = ToyTask(ToyTaskConfig(**{**TINY_TASK.to_dict(), "seed": 1}))
    assert [x.text for x in a.train] != [x.text for x in b.train]


def test_default_toy_task_shape_and_disjoint_splits():
    task = ToyTask()
    assert (len(task.train), len(task.val)) == (512, 64)
    assert not {x.text for x in task.train} & {x.text for x in task.val}
    assert task.train[0].features.shape == (96, 80)
    assert task.train[0].features.dtype == np.float32
    assert all(set(x.text) <= set("abcdefgh") and 3 <= len(x.text) <= 6 for x in task.train)


def test_toy_task_rejects_overfull_layout():
    with pytest.raises(ConfigError):
        ToyTaskConfig(max_symbols=8, max_dur=14, n_frames=96)


def test_batch_targets_shift_inputs():
    task = ToyTask(TINY_TASK)
    batch = make_batch(task.train[:3], task.vocab)
    for b, ex in enumerate(task.train[:3]):
        toks = ex.sample.tokens
        n = len(toks) - 1
        np.testing.assert_array_equal(batch.inputs[b, :n], toks[:-1])
        sup = batch.targets[b, :n] != IGNORE_ID
        np.testing.assert_array_equal(batch.targets[b, :n][sup], np.asarray(toks[1:])[sup])
        assert np.all(batch.targets[b, n:] == IGNORE_ID)


def test_prompt_positions_receive_no_gradient():
    cfg = ToyTaskConfig(**{**TINY_TASK.to_dict(), "prompt_prob": 1.0})
    task = ToyTask(cfg)
    prompted = [ex for ex in task.train if ex.sample.prompt is not None]
    assert prompted
    batch = make_batch(prompted[:2], task.vocab)
    V = len(task.vocab)
    logits = Tensor(SeededRng(7).normal(size=batch.targets.shape + (V,)), requires_grad=True)
    cross_entropy(logits, batch.targets).backward()
    ignored = batch.targets == IGNORE_ID
    # positions predicting prompt tokens are ignored; <sos> onwards is supervised
    for b, ex in enumerate(prompted[:2]):
        sos_at = ex.sample.tokens.index(task.vocab.sos)
        assert sos_at > 1
        assert np.all(ignored[b, : sos_at - 1])
        assert not ignored[b, sos_at - 1]
    assert np.all(logits.grad[ignored] == 0.0)
    assert np.all(np.abs(logits.grad[~ignored]).sum(-1) > 0)

    # perturbing logits at the ignored positions leaves the loss unchanged
    base = cross_entropy(logits.data, batch.targets).item()
    bumped = logits.data.copy()
    bumped[ignored] += SeededRng(8).normal(size=bumped[ignored].shape) * 10
    assert cross_entropy(bumped, batch.targets).item() == base


# trainer ---------------------------------------------------------------------


def test_overfits_a_single_sample():
    cfg = TINY.replace(encoder_type="e_branchformer", hidden=32, heads=4, conv_kernel=7, merge_kernel=7)
    task = ToyTask(ToyTaskConfig(**{**TINY_TASK.to_dict(), "n_train": 1, "n_val": 1}))
    trace = train_loop(build_model(cfg, 0), task, WarmupSchedule.scaled(300, 3e-3), 300, batch_size=1)
    assert min(p.train_loss for p in trace) < 0.05


def test_same_seed_same_trace():
    task = ToyTask(TINY_TASK)
    sched = WarmupSchedule.scaled(6, 1e-3)
    runs = [train_loop(build_model(TINY, 0), task, sched, 6, batch_size=3, rng=5, eval_interval=3) for _ in range(2)]
    assert runs[0] == runs[1]
    other = train_loop(build_model(TINY, 0), task, sched, 6, batch_size=3, rng=6, eval_interval=3)
    assert other != runs[0]


def test_trace_has_validation_at_interval_and_end():
    task = ToyTask(TINY_TASK)
    trace = train_loop(build_model(TINY, 0), task, WarmupSchedule.scaled(5, 1e-3), 5, batch_size=2, eval_interval=2)
    assert [p.step for p in trace if p.val_loss is not None] == [2, 4, 5]


def test_huge_learning_rate_diverges_with_step():
    task = ToyTask(TINY_TASK)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with pytest.raises(DivergenceError) as info:
            train_loop(build_model(TINY, 0), task, WarmupSchedule.scaled(20, 1e30), 20, batch_size=2, grad_clip=None)
    assert info.value.step >= 1
    assert not np.isfinite(info.value.loss)


def test_trace_csv_columns(tmp_path):
    task = ToyTask(TINY_TASK)
    trace = train_loop(build_model(TINY, 0), task, WarmupSchedule.scaled(2, 1e-3), 2, batch_size=2, eval_interval=2)
    path = tmp_path / "loss.csv"
    write_trace_csv(path, trace, "transformer", 0)
    lines = path.read_text().splitlines()
    assert lines[0] == "step,encoder_type,seed,train_loss,val_loss"
    assert len(lines) == 3 and lines[1].startswith("1,transformer,0,") and lines[1].endswith(",")


# encoder comparison ----------------------------------------------------------

SMALL_BASE = ModelConfig(encoder_type="e_branchformer", enc_layers=2, dec_layers=1, hidden=32, heads=4, conv_kernel=7, merge_kernel=7, cgmlp_expansion=4)


@pytest.mark.parametrize("et", ["transformer", "conformer", "e_branchformer"])
def test_budget_equalized_within_two_percent(et):
    target = count_params(build_model(SMALL_BASE, 0))
    cfg = equalize_budget(SMALL_BASE, et, target)
    assert cfg.encoder_type == et
    assert cfg.dec_layers == SMALL_BASE.dec_layers
    assert abs(count_params(build_model(cfg, 0)) - target) <= 0.02 * target


def test_budget_unreachable_raises():
    with pytest.raises(ConfigError):
        equalize_budget(SMALL_BASE, "transformer", target=10, tol=0.001)


def test_comparison_is_deterministic_and_thread_independent(monkeypatch):
    task = ToyTask(TINY_TASK)
    kw = dict(cfg_base=SMALL_BASE, task=task, steps=3, seeds=(0, 1), batch_size=2, eval_interval=3)
    a = compare_encoders(**kw)
    monkeypatch.setenv("SPEECHFM_WORKERS", "2")
    b = compare_encoders(**kw)
    assert a.summary() == b.summary()
    assert set(a.per_seed) == {0, 1}
    assert [r.trace for r in a.runs] == [r.trace for r in b.runs]
    assert a.verdict in ("pass", "fail")


def test_verdict_needs_two_of_three():
    from speechfm.training import Comparison

    c = Comparison([], [0, 1, 2], 1, {0: True, 1: False, 2: True})
    assert c.verdict == "pass"
    c.per_seed[2] = False
    assert c.verdict == "fail"
