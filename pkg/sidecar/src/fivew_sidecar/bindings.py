"""Model bindings: what the server actually runs behind each endpoint.

A binding names a role, the model checkpoint to load for it, and how to run
it (device, batch ceiling).  The registry here ships one family of "echo"
models — deterministic rule implementations that need no weights, answer in
microseconds, and behave identically to the rule-based in-process backends
bundled with the client library.  That equivalence is load-bearing: a client
pointed at an echo sidecar must produce byte-identical downstream artifacts
to the same client running its local rule backends, which is how the wire
layer is validated end to end.  Real checkpoints slot in by registering a
loader under a new model id.

Echo rules are deliberately re-implemented here rather than imported: the
server must not depend on the client package, so each side owns a copy and
the interop test suite keeps them honest.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .postprocess import paraphrase_postprocess

log = logging.getLogger(__name__)

ROLES = ("paraphrase", "nli", "srl", "qg", "qa")


class BindingError(RuntimeError):
    """A binding could not be loaded; the role stays unavailable."""


@dataclass(frozen=True)
class ModelBinding:
    """One (role, model) assignment from the server config."""

    role: str
    model_id: str
    device: str = "cpu"
    max_batch: int = 1

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}; expected one of {ROLES}")
        if not self.model_id.strip():
            raise ValueError("model_id must be non-empty")
        if not self.device.strip():
            raise ValueError("device must be non-empty")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")


# --- text helpers shared by the echo rules -----------------------------------

STOPWORDS = frozenset(
    """
    a an the and or but if then else of in on at by for with about into to
    from as is are was were be been being am do does did has have had will
    would can could shall should may might must not no nor so too very this
    that these those it its he she they them his her their we you i me my
    our your us
    who what when where why how whom whose which
    """.split()
)

LEXICON: Mapping[str, str] = {
    "cat": "feline",
    "dog": "canine",
    "big": "large",
    "small": "little",
    "fast": "quick",
    "happy": "glad",
    "house": "dwelling",
    "car": "automobile",
    "said": "stated",
    "show": "demonstrate",
    "shows": "demonstrates",
    "start": "begin",
    "started": "began",
    "make": "create",
    "made": "created",
    "buy": "purchase",
    "bought": "purchased",
    "city": "metropolis",
    "country": "nation",
    "company": "firm",
    "vaccine": "inoculation",
    "vaccines": "inoculations",
    "lawsuit": "litigation",
    "lawsuits": "litigations",
}

ANTONYMS: frozenset[frozenset[str]] = frozenset(
    frozenset(pair)
    for pair in [
        ("hot", "cold"),
        ("up", "down"),
        ("always", "never"),
        ("increase", "decrease"),
        ("win", "lose"),
        ("won", "lost"),
        ("true", "false"),
        ("guilty", "innocent"),
    ]
)

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_TERMINAL_PUNCT = (".", "!", "?", "…")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _clean_tokens(text: str) -> list[str]:
    """Whitespace tokens, punctuation stripped from both ends, casefolded;
    tokens emptied by the stripping are dropped."""
    out = []
    for tok in text.split():
        i, j = 0, len(tok)
        while i < j and _is_punct(tok[i]):
            i += 1
        while j > i and _is_punct(tok[j - 1]):
            j -= 1
        if i < j:
            out.append(tok[i:j].casefold())
    return out


def content_words(text: str) -> set[str]:
    return {tok for tok in _clean_tokens(text) if tok not in STOPWORDS}


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_SPLIT.split(text.strip()) if s]


def _core(token: str) -> str:
    cleaned = _clean_tokens(token)
    return cleaned[0] if cleaned else ""


def _synonym_closure(words: set[str]) -> set[str]:
    expanded = set(words)
    for key, value in LEXICON.items():
        if key in words:
            expanded.add(value)
        if value in words:
            expanded.add(key)
    return expanded


def _strip_terminal(text: str) -> str:
    text = text.rstrip()
    while text and text.endswith(_TERMINAL_PUNCT):
        text = text[:-1].rstrip()
    return text


# --- echo implementations ------------------------------------------------------


class EchoParaphrase:
    """Substitution paraphraser: variant i swaps the first min(i, k)
    lexicon-covered tokens for their substitutes (k = covered tokens); a
    text with no covered tokens gets a four-token sentinel suffix.

    Variants are rendered as a JSON list and read back through the same
    normalizer that handles raw generator output, so the normalize path is
    exercised on every call."""

    def generate(self, text: str, n: int, sampling: bool = False) -> list[str]:
        tokens = text.split()
        applicable = [i for i, tok in enumerate(tokens) if _core(tok) in LEXICON]
        variants = []
        for i in range(1, n + 1):
            if not applicable:
                variants.append(f"{text} so to speak ({i})")
                continue
            out = list(tokens)
            for pos in applicable[: min(i, len(applicable))]:
                core = _core(out[pos])
                out[pos] = out[pos].replace(core, LEXICON[core], 1)
            variants.append(" ".join(out))
        if not variants:
            return []
        return paraphrase_postprocess(json.dumps(variants))


class GarbledParaphrase:
    """Fault-injection binding: always emits unstructured prose, which the
    output normalizer rejects.  Useful for exercising a client's handling
    of generator-side failures without a broken checkpoint on hand."""

    def generate(self, text: str, n: int, sampling: bool = False) -> list[str]:
        prose = (
            f"Sure! Here are some ways to rephrase that. One option keeps the "
            f"original emphasis of {text!r} while another softens it slightly, "
            f"depending on the register you want.\n"
            f"Both read naturally in context."
        )
        return paraphrase_postprocess(prose)


class RuleNLI:
    """Entailment by lexical containment: hypothesis content words inside
    the premise's synonym-expanded content words → entailment; an antonym
    pair across the texts → contradiction; anything else neutral."""

    SCORES: Mapping[str, tuple[float, float, float]] = {
        "entailment": (0.8, 0.15, 0.05),
        "neutral": (0.1, 0.8, 0.1),
        "contradiction": (0.05, 0.15, 0.8),
    }

    def classify(
        self, premise: str, hypothesis: str, sampling: bool = False
    ) -> tuple[str, tuple[float, float, float]]:
        prem_words = content_words(premise)
        hyp = content_words(hypothesis)
        if hyp <= _synonym_closure(prem_words):
            label = "entailment"
        elif any(frozenset((p, h)) in ANTONYMS for p in prem_words for h in hyp):
            label = "contradiction"
        else:
            label = "neutral"
        return label, self.SCORES[label]


class RuleSRL:
    """Role labeler: the first token found in a small verb lexicon becomes
    the verb; everything before it is ARG0, everything after (minus a
    trailing punctuation-only token) is ARG1."""

    VERBS = frozenset(
        "is are was were has have had show shows showed said says start "
        "started sued sues visited visits made makes won lost runs ran".split()
    )

    def label(self, text: str, sampling: bool = False) -> list[dict]:
        tokens = text.split()
        verb_index = next(
            (i for i, tok in enumerate(tokens) if _core(tok) in self.VERBS),
            None,
        )
        if verb_index is None:
            return []
        spans = []
        if verb_index > 0:
            spans.append({"role": "ARG0", "start": 0, "end": verb_index})
        end = len(tokens)
        if end > verb_index + 1 and _core(tokens[end - 1]) == "":
            end -= 1
        if end > verb_index + 1:
            spans.append({"role": "ARG1", "start": verb_index + 1, "end": end})
        return [{"tokens": tokens, "verb_index": verb_index, "spans": spans}]


class TemplateQG:
    """Question generator: the answer span is replaced by the question
    word, terminal punctuation becomes "?", first character capitalized."""

    def generate(self, claim: str, w: str, answer_span: str, sampling: bool = False) -> str:
        if answer_span and answer_span in claim:
            question = claim.replace(answer_span, w, 1)
        else:
            question = f"{_strip_terminal(claim)} {w}"
        question = _strip_terminal(question) + "?"
        return question[0].upper() + question[1:]


class CoverQA:
    """Extractive reader: the first context sentence covering at least
    min_cover of the question's content words is the answer; the score is
    the covered fraction.  The context arrives as one string (passages are
    newline-joined by clients); the sentence splitter treats a newline
    after terminal punctuation as a boundary, so passages that end with
    ./!/? split exactly as they would passage-by-passage."""

    def __init__(self, min_cover: float = 1.0) -> None:
        if not 0.0 < min_cover <= 1.0:
            raise ValueError("min_cover must lie in (0, 1]")
        self.min_cover = min_cover

    def answer(self, question: str, context: str, sampling: bool = False) -> tuple[str, float]:
        wanted = content_words(question)
        if not wanted:
            return "", 0.0
        for sentence in split_sentences(context):
            have = content_words(sentence)
            cover = len(wanted & have) / len(wanted)
            if cover >= self.min_cover:
                return sentence, cover
        return "", 0.0


# --- registry --------------------------------------------------------------------


def _parse_options(spec: str) -> dict[str, str]:
    options = {}
    for part in spec.split(","):
        key, sep, value = part.partition("=")
        if not sep or not key or not value:
            raise BindingError(f"malformed model option {part!r}")
        options[key] = value
    return options


def load_binding(binding: ModelBinding):
    """Instantiate the implementation a binding names.

    Raises BindingError when no loader is registered for the model id or
    its options are malformed.  Real checkpoints (transformer weights etc.)
    would be registered here keyed by model id.
    """
    base, sep, option_spec = binding.model_id.partition(":")
    options = _parse_options(option_spec) if sep else {}

    if binding.role == "paraphrase" and base == "echo" and not options:
        return EchoParaphrase()
    if binding.role == "paraphrase" and base == "garbled" and not options:
        return GarbledParaphrase()
    if binding.role == "nli" and base == "echo" and not options:
        return RuleNLI()
    if binding.role == "srl" and base == "echo" and not options:
        return RuleSRL()
    if binding.role == "qg" and base == "echo" and not options:
        return TemplateQG()
    if binding.role == "qa" and base == "echo":
        unknown = set(options) - {"cover"}
        if unknown:
            raise BindingError(f"unknown qa options {sorted(unknown)}")
        if "cover" in options:
            try:
                cover = float(options["cover"])
            except ValueError as exc:
                raise BindingError(f"bad cover value {options['cover']!r}") from exc
            try:
                return CoverQA(min_cover=cover)
            except ValueError as exc:
                raise BindingError(str(exc)) from exc
        return CoverQA()

    raise BindingError(
        f"no loader registered for model {binding.model_id!r} (role {binding.role!r})"
    )


def default_bindings() -> list[ModelBinding]:
    """Echo bindings for all five roles — the no-weights configuration."""
    return [ModelBinding(role=role, model_id="echo") for role in ROLES]


@dataclass(frozen=True)
class LoadedBindings:
    """The outcome of loading a binding list: per-role implementations,
    per-role failure messages for roles that could not come up, and the
    binding each role was configured with."""

    implementations: Mapping[str, object] = field(default_factory=dict)
    failures: Mapping[str, str] = field(default_factory=dict)
    bindings: Mapping[str, ModelBinding] = field(default_factory=dict)

    def available_roles(self) -> list[str]:
        return sorted(self.implementations)


def load_bindings(bindings: Sequence[ModelBinding]) -> LoadedBindings:
    """Load every binding, isolating failures per role.

    A role whose binding fails to load is recorded in failures and served
    as unavailable; the process still comes up for the healthy roles.  Two
    bindings for the same role are a config error and rejected outright.
    """
    seen: dict[str, ModelBinding] = {}
    for binding in bindings:
        if binding.role in seen:
            raise ValueError(
                f"role {binding.role!r} bound twice "
                f"({seen[binding.role].model_id!r} and {binding.model_id!r})"
            )
        seen[binding.role] = binding

    implementations: dict[str, object] = {}
    failures: dict[str, str] = {}
    for role, binding in seen.items():
        try:
            implementations[role] = load_binding(binding)
        except BindingError as exc:
            log.error("binding for role %r failed to load: %s", role, exc)
            failures[role] = str(exc)
        else:
            log.info(
                "role %r serving model %r on %s (max_batch=%d)",
                role,
                binding.model_id,
                binding.device,
                binding.max_batch,
            )
    return LoadedBindings(
        implementations=implementations, failures=failures, bindings=dict(seen)
    )
