"""Tests for tokenization and similarity metrics.

Edit distance and ROUGE-L are checked against independent brute-force
oracles (full-matrix DP / exhaustive subsequence enumeration); BLEU against
hand-computed frozen values.
"""

import itertools
import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fivew.textmetrics import (
    CASEFOLD,
    STRIP_PUNCT,
    BleuConfig,
    PRF,
    TokenSeq,
    bleu,
    inv_bleu,
    med,
    rouge_l,
    token_prf,
    tokenize,
)

# --- independent oracles -------------------------------------------------


def med_oracle(xs, ys):
    """Full-matrix Levenshtein, written independently of the production code."""
    m, n = len(xs), len(ys)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
    for j in range(n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if xs[i - 1] == ys[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[m][n]


def lcs_oracle(xs, ys):
    """Longest common subsequence length by enumerating every subsequence of
    the shorter side. Exponential, only usable for tiny inputs."""
    if len(xs) > len(ys):
        xs, ys = ys, xs
    best = 0
    for r in range(len(xs), 0, -1):
        for combo in itertools.combinations(xs, r):
            it = iter(ys)
            if all(tok in it for tok in combo):
                best = r
                break
        if best:
            break
    return best


WORDS = ["the", "cat", "sat", "on", "mat", "a", "dog", "ran"]


def random_seq(rng, max_len=12):
    return [rng.choice(WORDS) for _ in range(rng.randrange(max_len + 1))]


# --- tokenize -------------------------------------------------------------


def test_tokenize_plain_split():
    assert tokenize("The cat  sat\ton the mat.").tokens == (
        "The",
        "cat",
        "sat",
        "on",
        "the",
        "mat.",
    )


def test_tokenize_casefold():
    assert tokenize("The CAT", {CASEFOLD}).tokens == ("the", "cat")


def test_tokenize_strip_punct():
    seq = tokenize('"Hello," she said...', {STRIP_PUNCT})
    assert seq.tokens == ("Hello", "she", "said")


def test_tokenize_strip_punct_drops_pure_punct_tokens():
    assert tokenize("wait -- what ?", {STRIP_PUNCT}).tokens == ("wait", "what")


def test_tokenize_keeps_interior_punctuation():
    assert tokenize("Pfizer-BioNTech's vaccine.", {STRIP_PUNCT}).tokens == (
        "Pfizer-BioNTech's",
        "vaccine",
    )


def test_tokenize_both_flags():
    seq = tokenize("The CAT!", {CASEFOLD, STRIP_PUNCT})
    assert seq.tokens == ("the", "cat")
    assert seq.normalization == frozenset({CASEFOLD, STRIP_PUNCT})


def test_tokenize_empty_and_whitespace():
    assert tokenize("").tokens == ()
    assert tokenize("   \n\t ").tokens == ()


def test_tokenize_rejects_unknown_flag():
    with pytest.raises(ValueError):
        tokenize("x", {"lowercase"})


def test_tokenseq_rejects_bad_tokens():
    with pytest.raises(ValueError):
        TokenSeq(("a b",))
    with pytest.raises(ValueError):
        TokenSeq(("",))


def test_tokenseq_is_hashable_and_sequence_like():
    seq = tokenize("a b c")
    assert len(seq) == 3
    assert seq[1] == "b"
    assert list(seq) == ["a", "b", "c"]
    assert hash(seq) == hash(TokenSeq(("a", "b", "c")))


# --- med -------------------------------------------------------------------


def test_med_trivial_cases():
    assert med([], []) == 0
    assert med(["a"], []) == 1
    assert med([], ["a", "b"]) == 2
    assert med(["a", "b"], ["a", "b"]) == 0
    assert med(["a", "b"], ["a", "c"]) == 1


def test_med_single_substitution_sentence():
    a = tokenize("the cat sat on the mat")
    b = tokenize("the dog sat on the mat")
    assert med(a, b) == 1


def test_med_against_oracle_random_pairs():
    rng = random.Random(1234)
    for _ in range(300):
        xs, ys = random_seq(rng), random_seq(rng)
        assert med(xs, ys) == med_oracle(xs, ys)


@given(
    st.lists(st.sampled_from(WORDS), max_size=8),
    st.lists(st.sampled_from(WORDS), max_size=8),
)
def test_med_matches_oracle(xs, ys):
    assert med(xs, ys) == med_oracle(xs, ys)


@given(
    st.lists(st.sampled_from(WORDS), max_size=6),
    st.lists(st.sampled_from(WORDS), max_size=6),
    st.lists(st.sampled_from(WORDS), max_size=6),
)
def test_med_metric_axioms(xs, ys, zs):
    assert med(xs, ys) == med(ys, xs)
    assert med(xs, ys) >= 0
    assert (med(xs, ys) == 0) == (xs == ys)
    assert med(xs, zs) <= med(xs, ys) + med(ys, zs)


@given(
    st.lists(st.sampled_from(WORDS), max_size=8),
    st.lists(st.sampled_from(WORDS), max_size=8),
)
def test_med_bounds(xs, ys):
    d = med(xs, ys)
    assert abs(len(xs) - len(ys)) <= d <= max(len(xs), len(ys))


# --- bleu -------------------------------------------------------------------


def test_bleu_identical_is_one():
    seq = tokenize("the cat sat on the mat")
    assert bleu(seq, [seq]) == pytest.approx(1.0)


def test_bleu_clipping_short_candidate():
    # "the the the" vs "the cat": unigram precision clips "the" at 1 -> 1/3,
    # penalty exp(1 - 2/3); frozen by hand.
    score = bleu(["the", "the", "the"], [["the", "cat"]], max_ngram=1)
    assert score == pytest.approx((1.0 / 3.0) * math.exp(1.0 / 3.0), abs=1e-9)


def test_bleu_disjoint_all_epsilon():
    # No n-gram overlap at all: every precision becomes the epsilon, so the
    # geometric mean is epsilon; both sides length 4 -> penalty 1.
    score = bleu(["a", "b", "c", "d"], [["e", "f", "g", "h"]])
    assert score == pytest.approx(0.01, abs=1e-9)


def test_bleu_partial_overlap_hand_computed():
    # cand = "the cat sat", ref = "the cat slept":
    #   p1 = 2/3, p2 = 1/2 ("the cat"), p3 = 0 -> eps, max_ngram=3
    # lengths equal -> penalty 1.
    score = bleu(["the", "cat", "sat"], [["the", "cat", "slept"]], max_ngram=3)
    expected = (2.0 / 3.0 * 0.5 * 0.01) ** (1.0 / 3.0)
    assert score == pytest.approx(expected, abs=1e-9)


def test_bleu_length_penalty_directions():
    # Longer candidate than reference is penalty-free only in standard BLEU;
    # here the formula applies both ways, so a long repeat-free candidate is
    # *not* penalized (r/c < 1 would inflate; clamp holds it at <= 1).
    short = bleu(["the", "cat"], [["the", "cat", "sat", "on", "mat"]], max_ngram=1)
    assert short == pytest.approx(math.exp(1.0 - 5.0 / 2.0), abs=1e-9)


def test_bleu_closest_reference_length_breaks_ties_low():
    # candidate length 3; refs of length 2 and 4 tie on |r-c|; the shorter wins.
    score = bleu(
        ["a", "b", "c"],
        [["a", "b"], ["a", "b", "c", "d"]],
        max_ngram=1,
    )
    # p1 = 1.0; r = 2, c = 3 -> penalty exp(1 - 2/3) > 1 -> clamped to 1.0
    assert score == pytest.approx(1.0)


def test_bleu_multi_reference_clipping_uses_max():
    # "the the" with refs "the cat" / "the the cat": clip count for "the" is 2.
    score = bleu(["the", "the"], [["the", "cat"], ["the", "the", "cat"]], max_ngram=1)
    assert score == pytest.approx(1.0)  # p1=1, closest ref len 2 -> penalty 1


def test_bleu_rejects_bad_inputs():
    with pytest.raises(ValueError):
        bleu([], [["a"]])
    with pytest.raises(ValueError):
        bleu(["a"], [])
    with pytest.raises(ValueError):
        bleu(["a"], [["b"]], max_ngram=0)


@given(
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=10),
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=10),
)
def test_bleu_bounds(cand, ref):
    assert 0.0 < bleu(cand, [ref]) <= 1.0


@given(st.lists(st.sampled_from(WORDS), min_size=1, max_size=10))
def test_bleu_self_is_one(seq):
    assert bleu(seq, [seq]) == pytest.approx(1.0)


# --- inv_bleu ----------------------------------------------------------------


def test_inv_bleu_identical_is_one():
    assert inv_bleu("the cat sat", "the cat sat") == pytest.approx(1.0)


def test_inv_bleu_casefolds_by_default():
    assert inv_bleu("The Cat Sat", "the cat sat") == pytest.approx(1.0)


def test_inv_bleu_disjoint_hits_ceiling():
    # Fully disjoint pair: bleu collapses to the epsilon floor -> 1/0.01.
    assert inv_bleu("aa bb cc dd", "ee ff gg hh") == pytest.approx(100.0)


def test_inv_bleu_orientation_first_arg_is_candidate():
    a, b = "the cat", "the cat sat on the mat"
    assert inv_bleu(a, b) != pytest.approx(inv_bleu(b, a))


def test_inv_bleu_rejects_empty():
    with pytest.raises(ValueError):
        inv_bleu("", "x")
    with pytest.raises(ValueError):
        inv_bleu("x", "")


def test_inv_bleu_custom_config():
    cfg = BleuConfig(max_ngram=1, smoothing=0.5, epsilon_floor=0.5, normalization=frozenset())
    assert inv_bleu("a b", "c d", cfg) == pytest.approx(2.0)


@given(
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=8),
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=8),
)
def test_inv_bleu_bounds(xs, ys):
    v = inv_bleu(" ".join(xs), " ".join(ys))
    assert 1.0 <= v <= 100.0


# --- rouge_l -----------------------------------------------------------------


def test_rouge_l_identical():
    seq = tokenize("the cat sat")
    prf = rouge_l(seq, seq)
    assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)


def test_rouge_l_hand_case():
    # cand "the cat sat", ref "the sat cat": LCS = 2 ("the cat" or "the sat")
    prf = rouge_l(["the", "cat", "sat"], ["the", "sat", "cat"])
    assert prf.precision == pytest.approx(2.0 / 3.0)
    assert prf.recall == pytest.approx(2.0 / 3.0)
    assert prf.f1 == pytest.approx(2.0 / 3.0)


def test_rouge_l_empty_sides():
    assert rouge_l([], ["a"]) == PRF(0.0, 0.0, 0.0)
    assert rouge_l(["a"], []) == PRF(0.0, 0.0, 0.0)


def test_rouge_l_against_exhaustive_oracle():
    rng = random.Random(99)
    for _ in range(150):
        xs = [rng.choice(WORDS) for _ in range(rng.randrange(9))]
        ys = [rng.choice(WORDS) for _ in range(rng.randrange(9))]
        prf = rouge_l(xs, ys)
        lcs = lcs_oracle(xs, ys)
        if not xs or not ys:
            assert prf == PRF(0.0, 0.0, 0.0)
        else:
            assert prf.precision == pytest.approx(lcs / len(xs))
            assert prf.recall == pytest.approx(lcs / len(ys))


@given(
    st.lists(st.sampled_from(WORDS), max_size=7),
    st.lists(st.sampled_from(WORDS), max_size=7),
)
def test_rouge_l_matches_oracle(xs, ys):
    prf = rouge_l(xs, ys)
    if not xs or not ys:
        assert prf == PRF(0.0, 0.0, 0.0)
    else:
        lcs = lcs_oracle(xs, ys)
        assert prf.precision == pytest.approx(lcs / len(xs))
        assert prf.recall == pytest.approx(lcs / len(ys))


# --- token_prf ----------------------------------------------------------------


def test_token_prf_spec_case():
    # predicted has one extra token and one repeat; gold is 3 tokens.
    prf = token_prf(["before", "the", "the", "pandemic"], ["before", "the", "pandemic"])
    assert prf.precision == pytest.approx(3.0 / 4.0)
    assert prf.recall == pytest.approx(1.0)
    assert prf.f1 == pytest.approx(2 * 0.75 / 1.75)


def test_token_prf_multiset_clipping():
    # "the the the" vs "the cat": only one "the" counts.
    prf = token_prf(["the", "the", "the"], ["the", "cat"])
    assert prf.precision == pytest.approx(1.0 / 3.0)
    assert prf.recall == pytest.approx(1.0 / 2.0)


def test_token_prf_order_invariant():
    a = token_prf(["a", "b", "c"], ["c", "b", "a"])
    assert a.f1 == pytest.approx(1.0)


def test_token_prf_empty():
    assert token_prf([], ["a"]) == PRF(0.0, 0.0, 0.0)
    assert token_prf(["a"], []) == PRF(0.0, 0.0, 0.0)


@given(
    st.lists(st.sampled_from(WORDS), max_size=8),
    st.lists(st.sampled_from(WORDS), max_size=8),
)
def test_token_prf_bounds_and_symmetry(xs, ys):
    prf = token_prf(xs, ys)
    assert 0.0 <= prf.precision <= 1.0
    assert 0.0 <= prf.recall <= 1.0
    assert 0.0 <= prf.f1 <= 1.0
    assert prf.f1 <= max(prf.precision, prf.recall) + 1e-12
    flipped = token_prf(ys, xs)
    assert prf.precision == pytest.approx(flipped.recall)
    assert prf.recall == pytest.approx(flipped.precision)
    # overlap is symmetric, so F1 is too
    assert prf.f1 == pytest.approx(flipped.f1)


def test_prf_from_pr_zero_division_guard():
    assert PRF.from_pr(0.0, 0.0).f1 == 0.0
