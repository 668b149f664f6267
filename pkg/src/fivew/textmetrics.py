"""Pure text-similarity primitives shared by the whole pipeline.

Tokenization, word-level edit distance, BLEU / inverse BLEU, ROUGE-L and
bag-of-token precision/recall/F1. Everything here is a pure function over
immutable inputs.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

CASEFOLD = "casefold"
STRIP_PUNCT = "strip-punctuation"

_KNOWN_FLAGS = frozenset({CASEFOLD, STRIP_PUNCT})


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


_TERMINAL_PUNCT = (".", "!", "?", "…")


def strip_terminal_punct(text: str) -> str:
    """Remove trailing sentence-final punctuation (and trailing spaces)."""
    text = text.rstrip()
    while text and text.endswith(_TERMINAL_PUNCT):
        text = text[:-1].rstrip()
    return text


@dataclass(frozen=True)
class TokenSeq:
    """An ordered, immutable sequence of word tokens plus the normalization
    flags it was produced with."""

    tokens: tuple[str, ...]
    normalization: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "normalization", frozenset(self.normalization))
        unknown = self.normalization - _KNOWN_FLAGS
        if unknown:
            raise ValueError(f"unknown normalization flags: {sorted(unknown)}")
        for tok in self.tokens:
            if not tok:
                raise ValueError("empty token in TokenSeq")
            if any(ch.isspace() for ch in tok):
                raise ValueError(f"token contains whitespace: {tok!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


def tokenize(text: str, normalization: Iterable[str] = ()) -> TokenSeq:
    """Split on unicode whitespace, then apply the requested normalization.

    STRIP_PUNCT removes leading/trailing punctuation per token and drops
    tokens emptied by the stripping; CASEFOLD casefolds each token.
    Deterministic: same text and flags, same result.
    """
    flags = frozenset(normalization)
    unknown = flags - _KNOWN_FLAGS
    if unknown:
        raise ValueError(f"unknown normalization flags: {sorted(unknown)}")
    tokens = text.split()
    if STRIP_PUNCT in flags:
        stripped = []
        for tok in tokens:
            i, j = 0, len(tok)
            while i < j and _is_punct(tok[i]):
                i += 1
            while j > i and _is_punct(tok[j - 1]):
                j -= 1
            if i < j:
                stripped.append(tok[i:j])
        tokens = stripped
    if CASEFOLD in flags:
        tokens = [tok.casefold() for tok in tokens]
    return TokenSeq(tuple(tokens), flags)


def _tokens(seq: "TokenSeq | Sequence[str]") -> tuple[str, ...]:
    if isinstance(seq, TokenSeq):
        return seq.tokens
    return tuple(seq)


@dataclass(frozen=True)
class PRF:
    """Precision / recall / F1 triple, each in [0, 1]."""

    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "PRF":
        if precision + recall == 0:
            return cls(precision, recall, 0.0)
        f1 = 2.0 * precision * recall / (precision + recall)
        return cls(precision, recall, f1)


ZERO_PRF = PRF(0.0, 0.0, 0.0)


def med(a: "TokenSeq | Sequence[str]", b: "TokenSeq | Sequence[str]") -> int:
    """Word-level Levenshtein distance, unit costs for insert/delete/substitute."""
    xs, ys = _tokens(a), _tokens(b)
    if len(xs) < len(ys):
        xs, ys = ys, xs
    prev = list(range(len(ys) + 1))
    for i, x in enumerate(xs, start=1):
        cur = [i] + [0] * len(ys)
        for j, y in enumerate(ys, start=1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (0 if x == y else 1),
            )
        prev = cur
    return prev[-1]


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    candidate: "TokenSeq | Sequence[str]",
    references: Sequence["TokenSeq | Sequence[str]"],
    max_ngram: int = 4,
    smoothing: float = 0.01,
) -> float:
    """Geometric mean of clipped n-gram precisions times a length penalty.

    Orders beyond the candidate length contribute no n-grams and are skipped
    (so an exact match scores 1.0 at any length); zero precisions at the
    remaining orders are replaced by the smoothing epsilon before the
    geometric mean. The length penalty is exp(1 - r/c) with r the reference
    length closest to the candidate length c; the final score is clamped
    into [0, 1] (the penalty formula is applied in both directions, so
    multi-reference corner cases can otherwise exceed 1).
    """
    if max_ngram < 1:
        raise ValueError("max_ngram must be >= 1")
    if not references:
        raise ValueError("at least one reference is required")
    cand = _tokens(candidate)
    if not cand:
        raise ValueError("empty candidate")
    refs = [_tokens(r) for r in references]

    orders = range(1, min(max_ngram, len(cand)) + 1)
    log_sum = 0.0
    for n in orders:
        cand_counts = _ngram_counts(cand, n)
        total = sum(cand_counts.values())
        clipped = 0
        for gram, count in cand_counts.items():
            best = max(_ngram_counts(ref, n).get(gram, 0) for ref in refs)
            clipped += min(count, best)
        precision = clipped / total
        if precision == 0.0:
            precision = smoothing
        log_sum += math.log(precision)
    geo_mean = math.exp(log_sum / len(orders))

    c = len(cand)
    r = min((len(ref) for ref in refs), key=lambda rl: (abs(rl - c), rl))
    penalty = math.exp(1.0 - r / c)
    return min(1.0, penalty * geo_mean)


@dataclass(frozen=True)
class BleuConfig:
    """Settings shared by bleu/inv_bleu callers."""

    max_ngram: int = 4
    smoothing: float = 0.01
    epsilon_floor: float = 0.01
    normalization: frozenset[str] = frozenset({CASEFOLD})


DEFAULT_BLEU = BleuConfig()


def inv_bleu(a: str, b: str, config: BleuConfig = DEFAULT_BLEU) -> float:
    """Dissimilarity between two strings: 1 / max(BLEU(a vs b), floor).

    Orientation is fixed: the first argument is the BLEU candidate. The
    floor keeps fully disjoint pairs at a finite 1/floor.
    """
    if not a or not b:
        raise ValueError("inv_bleu requires two non-empty strings")
    cand = tokenize(a, config.normalization)
    ref = tokenize(b, config.normalization)
    score = bleu(cand, [ref], max_ngram=config.max_ngram, smoothing=config.smoothing)
    return 1.0 / max(score, config.epsilon_floor)


def _lcs_len(xs: Sequence[str], ys: Sequence[str]) -> int:
    if not xs or not ys:
        return 0
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0] * (len(ys) + 1)
        for j, y in enumerate(ys, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: "TokenSeq | Sequence[str]", reference: "TokenSeq | Sequence[str]") -> PRF:
    """Longest-common-subsequence precision/recall/F1 over word tokens."""
    cand, ref = _tokens(candidate), _tokens(reference)
    if not cand or not ref:
        return ZERO_PRF
    lcs = _lcs_len(cand, ref)
    return PRF.from_pr(lcs / len(cand), lcs / len(ref))


def token_prf(predicted: "TokenSeq | Sequence[str]", gold: "TokenSeq | Sequence[str]") -> PRF:
    """Bag-of-tokens overlap; multiset intersection so repeated-token padding
    is penalized."""
    pred, ref = _tokens(predicted), _tokens(gold)
    if not pred or not ref:
        return ZERO_PRF
    overlap = sum((Counter(pred) & Counter(ref)).values())
    return PRF.from_pr(overlap / len(pred), overlap / len(ref))
