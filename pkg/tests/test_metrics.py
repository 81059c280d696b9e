import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bleu_by_hand, edit_distance_bruteforce
from speechfm.metrics import (
    AlignmentOp,
    align,
    basic_normalize,
    biased_wer,
    bleu,
    bleu_stats,
    cer,
    corpus_biased_wer,
    count_errors,
    speedup,
    wer,
)
from speechfm.numeric import SeededRng

WORDS = ["a", "b", "c", "d"]


def random_pair(rng, max_len=8):
    n, m = (int(x) for x in rng.integers(0, max_len + 1, size=2))
    return [WORDS[i] for i in rng.integers(0, 4, size=n)], [WORDS[i] for i in rng.integers(0, 4, size=m)]


def apply_ops(ops):
    ref = [op.ref_word for op in ops if op.ref_word is not None]
    hyp = [op.hyp_word for op in ops if op.hyp_word is not None]
    return ref, hyp


# alignment -------------------------------------------------------------------


def test_identical_all_matches():
    ops, d = align(["x", "y"], ["x", "y"])
    assert d == 0 and [o.kind for o in ops] == ["match", "match"]


def test_single_delete():
    ops, d = align(["a"], [])
    assert d == 1 and ops == [AlignmentOp("delete", ref_word="a")]


def test_empty_both():
    assert align([], []) == ([], 0)


def test_tie_break_prefers_substitution_at_the_end():
    ops, _ = align(["a"], ["b", "c"])
    assert [o.kind for o in ops] == ["insert", "substitute"]


def test_malformed_op_rejected():
    with pytest.raises(ValueError):
        AlignmentOp("insert", ref_word="a", hyp_word="b")


def test_distance_matches_bruteforce_500_pairs():
    rng = SeededRng(2024)
    for _ in range(500):
        ref, hyp = random_pair(rng)
        ops, d = align(ref, hyp)
        assert d == edit_distance_bruteforce(ref, hyp)
        assert apply_ops(ops) == (ref, hyp)
        assert d == sum(o.kind != "match" for o in ops)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(WORDS), max_size=8), st.lists(st.sampled_from(WORDS), max_size=8))
def test_distance_symmetric(ref, hyp):
    assert align(ref, hyp)[1] == align(hyp, ref)[1]
    c1, c2 = count_errors(ref, hyp), count_errors(hyp, ref)
    assert c1.errors == c2.errors
    # the breakdown may shift on ties, but deletions minus insertions is the length difference
    assert c1.deletions - c1.insertions == c2.insertions - c2.deletions == len(ref) - len(hyp)


# rates -----------------------------------------------------------------------


def test_wer_examples():
    assert wer("a b c", "a b c") == 0.0
    assert wer("a b c", "a x c") == pytest.approx(1 / 3)
    assert wer("a", "a b") == 1.0


def test_empty_reference():
    assert wer("", "") == 0.0
    assert wer("", "a") == math.inf


def test_cer_counts_characters_including_spaces():
    assert cer("ab c", "ab c") == 0.0
    assert cer("ab c", "abc") == pytest.approx(1 / 4)


def test_counts_add():
    total = count_errors(["a", "b"], ["a"]) + count_errors(["c"], ["d", "e"])
    assert (total.substitutions, total.deletions, total.insertions, total.ref_len) == (1, 1, 1, 3)


# biased WER ------------------------------------------------------------------


def test_bias_hand_example():
    r = biased_wer("the quick fox", "the quick box", {"fox"})
    assert r.wer == pytest.approx(1 / 3)
    assert r.u_wer == 0.0 and r.b_wer == 1.0
    assert (r.n_ref_b, r.n_ref_u) == (1, 2)


def test_bias_perfect_hypothesis():
    r = biased_wer("the quick fox", "the quick fox", {"fox"})
    assert (r.wer, r.u_wer, r.b_wer) == (0.0, 0.0, 0.0)


def test_inserted_bias_word_counts_as_biased():
    base = biased_wer("the quick fox", "the quick fox", {"fox", "box"})
    ins = biased_wer("the quick fox", "the quick box fox", {"fox", "box"})
    assert ins.errors_b == base.errors_b + 1 and ins.insertions_b == 1
    assert ins.errors_u == base.errors_u


def test_inserted_plain_word_counts_as_unbiased():
    r = biased_wer("the fox", "the big fox", {"fox"})
    assert (r.errors_b, r.errors_u, r.insertions_u) == (0, 1, 1)


def test_empty_bias_list_rejected():
    with pytest.raises(ValueError):
        biased_wer("a", "a", [])


def test_bias_errors_partition_total_500_cases():
    rng = SeededRng(99)
    for _ in range(500):
        ref, hyp = random_pair(rng)
        bias = [w for w in WORDS if rng.random() < 0.5] or ["a"]
        r = biased_wer(ref, hyp, bias)
        assert r.errors_u + r.errors_b == r.errors == align(ref, hyp)[1]
        assert r.n_ref_b + r.n_ref_u == len(ref)


def test_corpus_bias_pools_counts():
    r = corpus_biased_wer(["the quick fox", "a fox"], ["the quick box", "a fox"], ["fox"])
    assert (r.errors_b, r.n_ref_b, r.n_ref) == (1, 2, 5)
    assert r.b_wer == 0.5


# BLEU ------------------------------------------------------------------------

REFS = ["the cat is on the mat", "there is a cat here"]
HYPS = ["the cat is on mat", "a cat is here"]


def test_bleu_identity_is_exactly_one():
    assert bleu(REFS, REFS) == 1.0
    assert bleu(["a b"], ["a b"]) == 1.0


def test_bleu_hand_counted_two_segments():
    # unigrams 9/9, bigrams 4/7, trigrams 2/5, 4-grams 1/3; lengths hyp 9, ref 11
    expected = math.exp(1 - 11 / 9) * (1 * (4 / 7) * (2 / 5) * (1 / 3)) ** 0.25
    st_ = bleu_stats(REFS, HYPS)
    assert st_.matches == [9, 4, 2, 1] and st_.totals == [9, 7, 5, 3]
    assert (st_.hyp_len, st_.ref_len) == (9, 11)
    assert abs(bleu(REFS, HYPS) - expected) < 1e-9
    assert abs(bleu(REFS, HYPS) - bleu_by_hand([9, 4, 2, 1], [9, 7, 5, 3], 9, 11)) < 1e-9


def test_bleu_smooths_missing_higher_orders():
    # "a cat here" vs ref "there is a cat here": 4-gram count 0 of 0 totals -> 1/1
    st_ = bleu_stats(["there is a cat here"], ["a cat here"])
    assert st_.matches == [3, 2, 1, 0]
    assert st_.precisions[3] == 1.0
    st2 = bleu_stats(["x y z w v"], ["x q z q v"])
    assert st2.matches[1] == 0 and st2.precisions[1] == 1 / (4 + 1)


def test_bleu_empty_hypotheses():
    assert bleu(REFS, ["", ""]) == 0.0


def test_bleu_length_mismatch():
    with pytest.raises(ValueError):
        bleu(REFS, HYPS[:1])


def test_bleu_nonincreasing_under_corruption():
    rng = SeededRng(3)
    vocab = "alpha beta gamma delta eps zeta eta theta".split()
    for _ in range(50):
        refs = [" ".join(vocab[i] for i in rng.integers(0, 8, size=8)) for _ in range(3)]
        hyps = list(refs)
        k = int(rng.integers(0, 3))
        words = hyps[k].split()
        words[int(rng.integers(0, len(words)))] = "CORRUPT"
        hyps[k] = " ".join(words)
        assert bleu(refs, hyps) <= bleu(refs, refs)


# normalizer and speed ----------------------------------------------------------


def test_normalize_examples():
    assert basic_normalize("Hello, World!") == "hello world"
    assert basic_normalize("don't stop") == "don't stop"
    assert basic_normalize("  'quoted'  text ") == "quoted text"
    assert basic_normalize("a-b\tc") == "a b c"


@settings(max_examples=1000, deadline=None)
@given(st.text(max_size=30))
def test_normalize_idempotent(s):
    once = basic_normalize(s)
    assert basic_normalize(once) == once


def test_speedup_examples():
    assert speedup(150.0, 150.0) == 1.0
    assert speedup(200.0, 100.0) == 2.0
    assert speedup(300.0, 150.0) * speedup(150.0, 50.0) == pytest.approx(speedup(300.0, 50.0))


@pytest.mark.parametrize("a,b", [(0, 1), (1, 0), (-5, 2)])
def test_speedup_rejects_nonpositive(a, b):
    with pytest.raises(ValueError):
        speedup(a, b)
