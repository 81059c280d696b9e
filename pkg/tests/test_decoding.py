import math

import numpy as np
import pytest

from speechfm.decoding import (
    DecodeOptions,
    ScriptedModel,
    SuiteTiming,
    biasing_decode,
    greedy_decode,
    iteration_cap,
    lid_predict,
    long_form_decode,
    script_from_text,
    timed_decode_suite,
    window_at,
)
from speechfm.model import ModelConfig, build_model
from speechfm.protocol import VocabularyError, build_vocabulary

V = build_vocabulary()
FEATS_10S = np.zeros((1000, 80), np.float32)


def scripted(*pieces, **kw):
    return ScriptedModel(V, script_from_text(V, *pieces), **kw)


# greedy ----------------------------------------------------------------------


def test_scripted_sequence_returned_exactly():
    model = scripted("hello world")
    res = greedy_decode(model, FEATS_10S, DecodeOptions(lang="eng"))
    assert res.tokens == V.text_ids("hello world") + [V.eos]
    assert res.text == "hello world"
    assert not res.truncated
    assert res.token_count == len(res.tokens)
    assert res.prefix == [V.sos, V.lang_id("eng"), V.task_id("asr"), V.notimestamps]


def test_max_tokens_caps_and_flags():
    model = scripted("ab", loop=True)
    res = greedy_decode(model, FEATS_10S, DecodeOptions(lang="eng", max_tokens=5))
    assert res.token_count == 5 and res.truncated
    assert res.text == "ababa"


def test_max_tokens_must_be_positive():
    with pytest.raises(ValueError):
        DecodeOptions(max_tokens=0)


def test_timestamps_parsed_into_segments():
    model = scripted(0.0, "hi", 1.5, 2.0, "yo", 3.24)
    res = greedy_decode(model, FEATS_10S, DecodeOptions(lang="eng", with_timestamps=True))
    assert res.text == "hiyo"
    assert res.timestamps == [(0.0, 1.5), (2.0, 3.24)]
    assert V.notimestamps not in res.prefix


def test_text_is_detokenized_non_special_tokens():
    model = scripted(0.0, "a b", 1.0)
    res = greedy_decode(model, FEATS_10S, DecodeOptions(lang="eng", with_timestamps=True))
    assert res.text == V.detokenize(res.tokens)


def test_ignore_eos_runs_to_cap():
    res = greedy_decode(scripted("a"), FEATS_10S, DecodeOptions(lang="eng", max_tokens=4, ignore_eos=True))
    assert res.token_count == 4 and V.eos not in res.tokens


def test_ties_break_to_lowest_id():
    flat = ScriptedModel(V, lambda step, toks: np.zeros(len(V)))
    res = greedy_decode(flat, FEATS_10S, DecodeOptions(lang="eng", max_tokens=3))
    assert res.tokens == [0, 0, 0]
    assert greedy_decode(flat, FEATS_10S, DecodeOptions(max_tokens=1)).lang == V.languages[0]


def test_unencodable_prompt():
    with pytest.raises(VocabularyError):
        greedy_decode(scripted("a"), FEATS_10S, DecodeOptions(lang="eng", prompt="naïve"))


def test_too_long_for_one_window():
    from speechfm.numeric import ShapeError

    with pytest.raises(ShapeError):
        greedy_decode(scripted("a"), np.zeros((3001, 80), np.float32), DecodeOptions(lang="eng"))


@pytest.fixture(scope="module")
def tiny_model():
    cfg = ModelConfig(enc_layers=1, dec_layers=1, hidden=16, heads=2, conv_kernel=3, merge_kernel=3)
    return build_model(cfg, 0)


def test_real_model_deterministic(tiny_model):
    feats = np.random.default_rng(0).normal(size=(200, 80)).astype(np.float32)
    a = greedy_decode(tiny_model, feats, DecodeOptions(max_tokens=12))
    b = greedy_decode(tiny_model, feats, DecodeOptions(max_tokens=12))
    assert a.tokens == b.tokens and a.text == b.text and a.lang == b.lang


# language identification -------------------------------------------------------


def _lid_logits(step, toks):
    logits = np.zeros(len(V))
    logits[V.lang_id("jpn")] = 5.0
    logits[V.lang_id("deu")] = 4.0
    logits[V.char_id("x")] = 50.0
    return logits


def test_lid_restricted_to_language_block():
    assert lid_predict(ScriptedModel(V, _lid_logits), FEATS_10S) == "jpn"


def test_lid_uniform_picks_lowest_id():
    flat = ScriptedModel(V, lambda step, toks: np.zeros(len(V)))
    assert lid_predict(flat, FEATS_10S) == V.code_of(V.language_range.start)


def test_lid_invariant_to_non_language_shift():
    def shifted(step, toks):
        logits = _lid_logits(step, toks)
        mask = np.ones(len(V), bool)
        mask[V.language_range.start : V.language_range.stop] = False
        logits[mask] += 10.0
        return logits

    assert lid_predict(ScriptedModel(V, shifted), FEATS_10S) == "jpn"


def test_predicted_language_forced_into_prefix():
    model = ScriptedModel(V, lambda step, toks: _lid_logits(step, toks) if len(toks) == 1 else np.eye(len(V))[V.eos])
    res = greedy_decode(model, FEATS_10S)
    assert res.lang == "jpn" and res.prefix[1] == V.lang_id("jpn")


# biasing ---------------------------------------------------------------------


def test_bias_words_become_sop_prompt():
    res = biasing_decode(scripted("the fox"), FEATS_10S, ["fox", "box"], DecodeOptions(lang="eng"))
    expected = [V.sop] + V.text_ids("fox box")
    assert res.prefix[: len(expected)] == expected
    assert res.prefix[len(expected)] == V.sos


def test_empty_bias_list():
    with pytest.raises(ValueError):
        biasing_decode(scripted("a"), FEATS_10S, [], DecodeOptions(lang="eng"))


def test_prompt_ignoring_stub_unchanged_by_bias():
    model = scripted("abc")
    a = greedy_decode(model, FEATS_10S, DecodeOptions(lang="eng"))
    b = biasing_decode(model, FEATS_10S, ["zebra", "quokka"], DecodeOptions(lang="eng"))
    assert (a.tokens, a.text) == (b.tokens, b.text)


# long form -------------------------------------------------------------------


def test_ninety_seconds_with_28s_segments():
    model = scripted(0.0, "seg ", 28.0)
    res = long_form_decode(model, np.zeros((9000, 80), np.float32), DecodeOptions(lang="eng"))
    assert res.windows == [0.0, 28.0, 56.0, 84.0]
    assert res.text == "seg " * 4
    assert [s[0] for s in res.timestamps] == [0.0, 28.0, 56.0, 84.0]
    assert not res.truncated


def test_trailing_open_segment_dropped_until_final_window():
    model = scripted(0.0, "a", 10.0, 10.0, "tail")
    res = long_form_decode(model, np.zeros((5000, 80), np.float32), DecodeOptions(lang="eng"))
    assert res.windows == [0.0, 10.0, 20.0]
    # the last window reaches the end of the audio and keeps its open tail
    assert res.text == "a" + "a" + "atail"


def test_short_input_single_window_equals_greedy():
    model = scripted(0.0, "short", 2.0)
    feats = np.zeros((1200, 80), np.float32)
    lf = long_form_decode(model, feats, DecodeOptions(lang="eng"))
    g = greedy_decode(model, feats, DecodeOptions(lang="eng", with_timestamps=True))
    assert lf.windows == [0.0]
    assert lf.text == g.text and lf.timestamps == g.timestamps


@pytest.mark.parametrize("frames", [9000, 9001, 3000, 1, 12345])
def test_no_timestamps_advances_full_windows(frames):
    model = scripted("words")
    res = long_form_decode(model, np.zeros((frames, 80), np.float32), DecodeOptions(lang="eng"))
    n = math.ceil(frames / 3000)
    assert len(res.windows) == n
    assert res.windows == [30.0 * i for i in range(n)]
    assert res.text == "words" * n


def test_iteration_cap_terminates_creeping_stub():
    # advances by one timestamp step per window; only the cap stops it
    model = scripted(0.0, "x", 0.02)
    frames = 6000
    res = long_form_decode(model, np.zeros((frames, 80), np.float32), DecodeOptions(lang="eng"))
    assert len(res.windows) == iteration_cap(frames) == 4
    assert res.truncated


def test_cursor_strictly_increases_and_stays_in_range():
    model = scripted(0.0, "x", 7.3, 8.0, "y", 13.42)
    frames = 7777
    res = long_form_decode(model, np.zeros((frames, 80), np.float32), DecodeOptions(lang="eng"))
    w = res.windows
    assert all(b > a for a, b in zip(w, w[1:]))
    assert all(0 <= x <= frames / 100 for x in w)
    assert len(w) <= iteration_cap(frames)


def test_window_zero_pads_tail():
    feats = np.ones((4500, 80), np.float32)
    w = window_at(feats, 30.0)
    assert w.shape == (3000, 80)
    assert w[:1500].min() == 1.0 and w[1500:].max() == 0.0


# benchmarking ------------------------------------------------------------------


def test_suite_self_ratio_near_one(tiny_model):
    rng = np.random.default_rng(1)
    feats = [rng.normal(size=(300, 80)).astype(np.float32) for _ in range(3)]
    opts = DecodeOptions(lang="eng", max_tokens=16, ignore_eos=True)
    # many short alternating rounds: drift and load bursts land on both sides,
    # and each per-utterance minimum gets enough chances at a quiet slot
    rounds = [(timed_decode_suite(tiny_model, feats, opts, repeats=1, label="a"), timed_decode_suite(tiny_model, feats, opts, repeats=1, label="b")) for _ in range(30)]
    a = SuiteTiming("a", [min(xs) for xs in zip(*(r[0].per_utterance_ms for r in rounds))], 30)
    b = SuiteTiming("b", [min(xs) for xs in zip(*(r[1].per_utterance_ms for r in rounds))], 30)
    assert len(a.per_utterance_ms) == 3
    assert abs(b.speedup_over(a) - 1.0) <= 0.05


def test_suite_needs_utterances(tiny_model):
    with pytest.raises(ValueError):
        timed_decode_suite(tiny_model, [], DecodeOptions(lang="eng"))


def test_scripted_config_round_trip():
    model = scripted(0.0, "hi", 1.0, loop=True)
    back = ScriptedModel.from_config(model.to_config())
    assert back.script == model.script and back.loop and back.vocab == model.vocab
