"""Model backends: one uniform abstraction over the five model roles the
pipeline consumes (paraphraser, entailment, role labeler, question
generator, question answerer).

Each role has a deterministic rule-based mock (property-test friendly), a
scripted replay wrapper (fixture transcripts), and a remote HTTP client
speaking the sidecar wire protocol. Remote payloads are schema-validated in
both directions; the validators are shared with the sidecar's contract
tests.
"""

from __future__ import annotations

import enum
import math
import re
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import requests

from .srl5w import FiveW, PropBankRole, RoleSpan, SRLFrame
from .textmetrics import CASEFOLD, STRIP_PUNCT, TokenSeq, strip_terminal_punct, tokenize

DEFAULT_TIMEOUT = 30.0
DEFAULT_RETRIES = 2


class BackendRole(enum.Enum):
    PARAPHRASE = "paraphrase"
    NLI = "nli"
    SRL = "srl"
    QG = "qg"
    QA = "qa"


class BackendKind(enum.Enum):
    MOCK = "mock"
    REMOTE = "remote"


@dataclass(frozen=True)
class BackendDescriptor:
    role: BackendRole
    kind: BackendKind
    endpoint: Optional[str] = None
    model_id: str = ""

    def __post_init__(self) -> None:
        if self.kind is BackendKind.REMOTE and not self.endpoint:
            raise ValueError("remote backend requires an endpoint")
        if self.kind is BackendKind.MOCK and self.endpoint:
            raise ValueError("mock backend must not carry an endpoint")


class NLILabel(enum.Enum):
    ENTAILMENT = "entailment"
    NEUTRAL = "neutral"
    CONTRADICTION = "contradiction"


#: Wire order of the three NLI scores.
NLI_SCORE_ORDER = (NLILabel.ENTAILMENT, NLILabel.NEUTRAL, NLILabel.CONTRADICTION)


@dataclass(frozen=True)
class NLIResult:
    label: NLILabel
    scores: tuple[float, float, float]  # entailment, neutral, contradiction

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if len(self.scores) != 3:
            raise ValueError("exactly three scores required")
        if any(not 0.0 <= s <= 1.0 for s in self.scores):
            raise ValueError("scores must lie in [0, 1]")
        if not math.isclose(sum(self.scores), 1.0, abs_tol=1e-6):
            raise ValueError("scores must sum to 1")


@dataclass(frozen=True)
class AnswerResult:
    """A question-answering outcome; empty answer_text means "no answer"."""

    question: str
    answer_text: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")

    @property
    def is_empty(self) -> bool:
        return not self.answer_text.strip()


# --- errors ---------------------------------------------------------------


class BackendError(Exception):
    """Base class for backend failures."""


class TransportError(BackendError):
    """Connection/timeout-level failure (after retries)."""


class StatusError(BackendError):
    """The server answered with a non-success status."""

    def __init__(self, status_code: int, message: str = "") -> None:
        super().__init__(message or f"server returned status {status_code}")
        self.status_code = status_code


class SchemaError(BackendError):
    """A payload failed wire-schema validation."""


# --- shared vocabulary for the rule-based mocks -----------------------------

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

#: token -> substitute used by the rule-based paraphraser; values are
#: intentionally outside the stopword list.
MOCK_LEXICON: Mapping[str, str] = {
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

#: unordered contradiction cues for the rule-based entailment mock.
MOCK_ANTONYMS: frozenset[frozenset[str]] = frozenset(
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


def content_words(text: str) -> set[str]:
    """Casefolded, punctuation-stripped tokens minus stopwords and question
    words."""
    seq = tokenize(text, {CASEFOLD, STRIP_PUNCT})
    return {tok for tok in seq if tok not in STOPWORDS}


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_SPLIT.split(text.strip()) if s]


def _synonym_closure(words: set[str]) -> set[str]:
    expanded = set(words)
    for key, value in MOCK_LEXICON.items():
        if key in words:
            expanded.add(value)
        if value in words:
            expanded.add(key)
    return expanded


# --- rule-based mocks --------------------------------------------------------


class MockParaphrase:
    """Deterministic paraphraser: variant i substitutes the first
    min(i, k) lexicon-covered tokens (k = covered tokens in the claim); a
    claim with no covered tokens gets a four-token sentinel suffix instead,
    keeping its word edit distance above the coverage threshold."""

    def __init__(self, lexicon: Mapping[str, str] = MOCK_LEXICON) -> None:
        self._lexicon = dict(lexicon)

    def paraphrase(self, text: str, n: int) -> list[str]:
        if n < 0:
            raise ValueError("n must be >= 0")
        tokens = text.split()
        applicable = [
            i
            for i, tok in enumerate(tokens)
            if _strip_token(tok) in self._lexicon
        ]
        variants = []
        for i in range(1, n + 1):
            if not applicable:
                variants.append(f"{text} so to speak ({i})")
                continue
            out = list(tokens)
            for pos in applicable[: min(i, len(applicable))]:
                core = _strip_token(out[pos])
                out[pos] = out[pos].replace(core, self._lexicon[core], 1)
            variants.append(" ".join(out))
        return variants


def _strip_token(token: str) -> str:
    seq = tokenize(token, {CASEFOLD, STRIP_PUNCT})
    return seq[0] if len(seq) else ""


def mock_paraphrase(claim: str, n: int) -> list[str]:
    return MockParaphrase().paraphrase(claim, n)


class MockNLI:
    """Deterministic entailment: hypothesis content words inside the
    premise's synonym-expanded content words → entailment; a scripted
    antonym pair across the texts → contradiction; anything else neutral."""

    def nli(self, premise: str, hypothesis: str) -> NLIResult:
        prem = _synonym_closure(content_words(premise))
        hyp = content_words(hypothesis)
        if hyp <= prem:
            label = NLILabel.ENTAILMENT
        elif any(
            frozenset((p, h)) in MOCK_ANTONYMS
            for p in content_words(premise)
            for h in hyp
        ):
            label = NLILabel.CONTRADICTION
        else:
            label = NLILabel.NEUTRAL
        return NLIResult(label, _label_scores(label))


_LABEL_SCORES: Mapping[NLILabel, tuple[float, float, float]] = {
    NLILabel.ENTAILMENT: (0.8, 0.15, 0.05),
    NLILabel.NEUTRAL: (0.1, 0.8, 0.1),
    NLILabel.CONTRADICTION: (0.05, 0.15, 0.8),
}


def _label_scores(label: NLILabel) -> tuple[float, float, float]:
    return _LABEL_SCORES[label]


def mock_nli(premise: str, hypothesis: str) -> NLIResult:
    return MockNLI().nli(premise, hypothesis)


class MockQA:
    """Deterministic reader: the first evidence sentence covering at least
    min_cover of the question's content words wins; confidence is the
    covered fraction. Default min_cover 1.0 = every content word required."""

    def __init__(self, min_cover: float = 1.0) -> None:
        if not 0.0 < min_cover <= 1.0:
            raise ValueError("min_cover must lie in (0, 1]")
        self._min_cover = min_cover

    def answer(self, question: str, passages: Sequence[str]) -> AnswerResult:
        wanted = content_words(question)
        if not wanted:
            return AnswerResult(question, "", 0.0)
        for passage in passages:
            for sentence in split_sentences(passage):
                have = content_words(sentence)
                cover = len(wanted & have) / len(wanted)
                if cover >= self._min_cover:
                    return AnswerResult(question, sentence, cover)
        return AnswerResult(question, "", 0.0)


def mock_qa(question: str, passages: Sequence[str]) -> AnswerResult:
    return MockQA().answer(question, passages)


class MockSRL:
    """Deterministic role labeler: the first token found in a tiny verb
    lexicon becomes the verb; everything before it is ARG0, everything
    after (minus a trailing punctuation-only token) is ARG1."""

    VERBS = frozenset(
        "is are was were has have had show shows showed said says start "
        "started sued sues visited visits made makes won lost runs ran".split()
    )

    def srl(self, text: str, claim_id: str = "") -> list[SRLFrame]:
        tokens = text.split()
        verb_index = next(
            (i for i, tok in enumerate(tokens) if _strip_token(tok) in self.VERBS),
            None,
        )
        if verb_index is None:
            return []
        spans = []
        if verb_index > 0:
            spans.append(
                RoleSpan(PropBankRole.ARG0, 0, verb_index, " ".join(tokens[:verb_index]))
            )
        end = len(tokens)
        if end > verb_index + 1 and _strip_token(tokens[end - 1]) == "":
            end -= 1  # leave a trailing punctuation token out of the span
        if end > verb_index + 1:
            spans.append(
                RoleSpan(
                    PropBankRole.ARG1,
                    verb_index + 1,
                    end,
                    " ".join(tokens[verb_index + 1 : end]),
                )
            )
        return [
            SRLFrame(
                claim_id=claim_id,
                sentence_tokens=TokenSeq(tuple(tokens)),
                verb_index=verb_index,
                verb_text=tokens[verb_index],
                spans=tuple(spans),
            )
        ]




class MockQG:
    """Deterministic question generator mirroring the template engine:
    the answer span is replaced by the question word, terminal punctuation
    becomes \"?\", and the first character is capitalized."""

    def qg(self, claim: str, w: FiveW, answer_span: str) -> str:
        w_word = w.value
        if answer_span and answer_span in claim:
            question = claim.replace(answer_span, w_word, 1)
        else:
            question = f"{strip_terminal_punct(claim)} {w_word}"
        question = strip_terminal_punct(question) + "?"
        return question[0].upper() + question[1:]


# --- scripted replay wrappers --------------------------------------------------


class ScriptedParaphrase:
    """Replays a fixed transcript: claim text -> list of paraphrases.

    Unknown claims defer to the fallback (rule mock by default)."""

    def __init__(
        self,
        transcript: Mapping[str, Sequence[str]],
        fallback: Optional[MockParaphrase] = None,
    ) -> None:
        self._transcript = {k: list(v) for k, v in transcript.items()}
        self._fallback = fallback if fallback is not None else MockParaphrase()

    def paraphrase(self, text: str, n: int) -> list[str]:
        if text in self._transcript:
            return self._transcript[text][:n]
        return self._fallback.paraphrase(text, n)


class ScriptedNLI:
    """Replays (premise, hypothesis) -> label; unknown pairs defer to the
    rule mock."""

    def __init__(
        self,
        transcript: Mapping[tuple[str, str], NLILabel],
        fallback: Optional[MockNLI] = None,
    ) -> None:
        self._transcript = dict(transcript)
        self._fallback = fallback if fallback is not None else MockNLI()

    def nli(self, premise: str, hypothesis: str) -> NLIResult:
        label = self._transcript.get((premise, hypothesis))
        if label is None:
            return self._fallback.nli(premise, hypothesis)
        return NLIResult(label, _label_scores(label))


class ScriptedQA:
    """Replays question -> (answer, score); unknown questions yield the
    no-answer result (or the fallback's answer when one is given)."""

    def __init__(
        self,
        transcript: Mapping[str, tuple[str, float]],
        fallback: Optional[MockQA] = None,
    ) -> None:
        self._transcript = dict(transcript)
        self._fallback = fallback

    def answer(self, question: str, passages: Sequence[str]) -> AnswerResult:
        if question in self._transcript:
            answer, score = self._transcript[question]
            return AnswerResult(question, answer, score)
        if self._fallback is not None:
            return self._fallback.answer(question, passages)
        return AnswerResult(question, "", 0.0)


# --- wire schema validation (shared with the sidecar's contract tests) ---------

_ROLE_LABELS = frozenset(r.value for r in PropBankRole)
_W_LABELS = frozenset(w.value for w in FiveW)
_NLI_LABELS = frozenset(l.value for l in NLILabel)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def _require_str(payload: Mapping, key: str, allow_empty: bool = False) -> str:
    _require(key in payload, f"missing field {key!r}")
    value = payload[key]
    _require(isinstance(value, str), f"field {key!r} must be a string")
    if not allow_empty:
        _require(bool(value.strip()), f"field {key!r} must be non-empty")
    return value


def validate_request(role: BackendRole, payload: object) -> None:
    """Raise SchemaError unless payload is a valid request body for role."""
    _require(isinstance(payload, Mapping), "request body must be an object")
    assert isinstance(payload, Mapping)
    if role is BackendRole.PARAPHRASE:
        _require_str(payload, "text")
        n = payload.get("n")
        _require(isinstance(n, int) and not isinstance(n, bool), "field 'n' must be an integer")
        _require(n >= 0, "field 'n' must be >= 0")
        _require(set(payload) == {"text", "n"}, "unexpected fields in paraphrase request")
    elif role is BackendRole.NLI:
        _require_str(payload, "premise")
        _require_str(payload, "hypothesis")
        _require(set(payload) == {"premise", "hypothesis"}, "unexpected fields in nli request")
    elif role is BackendRole.SRL:
        _require_str(payload, "text")
        _require(set(payload) == {"text"}, "unexpected fields in srl request")
    elif role is BackendRole.QG:
        _require_str(payload, "claim")
        w = _require_str(payload, "w")
        _require(w in _W_LABELS, f"unknown question word {w!r}")
        _require_str(payload, "answer_span")
        _require(set(payload) == {"claim", "w", "answer_span"}, "unexpected fields in qg request")
    elif role is BackendRole.QA:
        _require_str(payload, "question")
        _require_str(payload, "context")
        _require(set(payload) == {"question", "context"}, "unexpected fields in qa request")
    else:  # pragma: no cover - exhaustive enum
        raise SchemaError(f"unknown role {role}")


def validate_response(role: BackendRole, payload: object) -> None:
    """Raise SchemaError unless payload is a valid response body for role."""
    _require(isinstance(payload, Mapping), "response body must be an object")
    assert isinstance(payload, Mapping)
    if role is BackendRole.PARAPHRASE:
        paraphrases = payload.get("paraphrases")
        _require(isinstance(paraphrases, list), "field 'paraphrases' must be a list")
        _require(
            all(isinstance(p, str) for p in paraphrases),
            "paraphrases must all be strings",
        )
    elif role is BackendRole.NLI:
        label = payload.get("label")
        _require(label in _NLI_LABELS, f"unknown nli label {label!r}")
        scores = payload.get("scores")
        _require(
            isinstance(scores, list) and len(scores) == 3,
            "field 'scores' must be a list of three numbers",
        )
        _require(
            all(isinstance(s, (int, float)) and not isinstance(s, bool) for s in scores),
            "scores must be numbers",
        )
        _require(
            all(0.0 <= float(s) <= 1.0 for s in scores),
            "scores must lie in [0, 1]",
        )
        _require(
            math.isclose(sum(float(s) for s in scores), 1.0, abs_tol=1e-6),
            "scores must sum to 1",
        )
    elif role is BackendRole.SRL:
        frames = payload.get("frames")
        _require(isinstance(frames, list), "field 'frames' must be a list")
        for frame in frames:
            _require(isinstance(frame, Mapping), "frame must be an object")
            tokens = frame.get("tokens")
            _require(
                isinstance(tokens, list) and all(isinstance(t, str) for t in tokens),
                "frame tokens must be a list of strings",
            )
            verb_index = frame.get("verb_index")
            _require(
                isinstance(verb_index, int) and not isinstance(verb_index, bool),
                "verb_index must be an integer",
            )
            _require(0 <= verb_index < len(tokens), "verb_index outside tokens")
            spans = frame.get("spans")
            _require(isinstance(spans, list), "frame spans must be a list")
            for span in spans:
                _require(isinstance(span, Mapping), "span must be an object")
                _require(span.get("role") in _ROLE_LABELS, f"unknown role {span.get('role')!r}")
                start, end = span.get("start"), span.get("end")
                _require(
                    isinstance(start, int) and isinstance(end, int),
                    "span start/end must be integers",
                )
                _require(0 <= start < end <= len(tokens), "span outside tokens")
    elif role is BackendRole.QG:
        _require_str(payload, "question")
    elif role is BackendRole.QA:
        _require("answer" in payload, "missing field 'answer'")
        _require(isinstance(payload["answer"], str), "field 'answer' must be a string")
        score = payload.get("score")
        _require(
            isinstance(score, (int, float)) and not isinstance(score, bool),
            "field 'score' must be a number",
        )
        _require(0.0 <= float(score) <= 1.0, "field 'score' must lie in [0, 1]")
    else:  # pragma: no cover - exhaustive enum
        raise SchemaError(f"unknown role {role}")


# --- remote client ---------------------------------------------------------------

_PATHS = {
    BackendRole.PARAPHRASE: "/v1/paraphrase",
    BackendRole.NLI: "/v1/nli",
    BackendRole.SRL: "/v1/srl",
    BackendRole.QG: "/v1/qg",
    BackendRole.QA: "/v1/qa",
}

_RETRIABLE_STATUSES = frozenset({502, 503, 504})


class RemoteBackend:
    """Shared HTTP plumbing: request validation before any network activity,
    bounded connection pool, timeout, bounded retries with exponential
    backoff on transport failures and transient statuses, and response
    schema validation before anything is returned."""

    role: BackendRole

    def __init__(
        self,
        descriptor: BackendDescriptor,
        timeout: float = DEFAULT_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
        backoff: float = 0.5,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if descriptor.kind is not BackendKind.REMOTE:
            raise ValueError("RemoteBackend requires a remote descriptor")
        if descriptor.role is not self.role:
            raise ValueError(
                f"descriptor role {descriptor.role.value} does not match {self.role.value}"
            )
        self.descriptor = descriptor
        self._timeout = timeout
        self._retries = retries
        self._backoff = backoff
        self._sleep = sleep
        if session is None:
            session = requests.Session()
            adapter = requests.adapters.HTTPAdapter(pool_connections=4, pool_maxsize=8)
            session.mount("http://", adapter)
            session.mount("https://", adapter)
        self._session = session

    def _post(self, payload: dict) -> dict:
        validate_request(self.role, payload)
        url = self.descriptor.endpoint.rstrip("/") + _PATHS[self.role]
        last_error: BackendError | None = None
        for attempt in range(self._retries + 1):
            if attempt:
                self._sleep(self._backoff * (2 ** (attempt - 1)))
            try:
                response = self._session.post(url, json=payload, timeout=self._timeout)
            except requests.RequestException as exc:
                last_error = TransportError(str(exc))
                continue
            if response.status_code in _RETRIABLE_STATUSES:
                last_error = StatusError(response.status_code)
                continue
            if not 200 <= response.status_code < 300:
                raise StatusError(response.status_code)
            try:
                body = response.json()
            except ValueError as exc:
                raise SchemaError(f"response body is not valid structured data: {exc}") from exc
            validate_response(self.role, body)
            return body
        assert last_error is not None
        raise last_error


class RemoteParaphrase(RemoteBackend):
    role = BackendRole.PARAPHRASE

    def paraphrase(self, text: str, n: int) -> list[str]:
        body = self._post({"text": text, "n": n})
        return list(body["paraphrases"])


class RemoteNLI(RemoteBackend):
    role = BackendRole.NLI

    def nli(self, premise: str, hypothesis: str) -> NLIResult:
        body = self._post({"premise": premise, "hypothesis": hypothesis})
        return NLIResult(NLILabel(body["label"]), tuple(float(s) for s in body["scores"]))


class RemoteSRL(RemoteBackend):
    role = BackendRole.SRL

    def srl(self, text: str, claim_id: str = "") -> list[SRLFrame]:
        body = self._post({"text": text})
        frames = []
        for raw in body["frames"]:
            tokens = list(raw["tokens"])
            frames.append(
                SRLFrame(
                    claim_id=claim_id,
                    sentence_tokens=TokenSeq(tuple(tokens)),
                    verb_index=raw["verb_index"],
                    verb_text=tokens[raw["verb_index"]],
                    spans=tuple(
                        RoleSpan(
                            PropBankRole(s["role"]),
                            s["start"],
                            s["end"],
                            " ".join(tokens[s["start"] : s["end"]]),
                        )
                        for s in raw["spans"]
                    ),
                )
            )
        return frames


class RemoteQG(RemoteBackend):
    role = BackendRole.QG

    def qg(self, claim: str, w: FiveW, answer_span: str) -> str:
        body = self._post({"claim": claim, "w": w.value, "answer_span": answer_span})
        return body["question"]


class RemoteQA(RemoteBackend):
    role = BackendRole.QA

    def answer(self, question: str, passages: Sequence[str]) -> AnswerResult:
        context = "\n".join(passages)
        body = self._post({"question": question, "context": context})
        return AnswerResult(question, body["answer"], float(body["score"]))


_REMOTE_CLASSES = {
    BackendRole.PARAPHRASE: RemoteParaphrase,
    BackendRole.NLI: RemoteNLI,
    BackendRole.SRL: RemoteSRL,
    BackendRole.QG: RemoteQG,
    BackendRole.QA: RemoteQA,
}

_MOCK_FACTORIES = {
    BackendRole.PARAPHRASE: MockParaphrase,
    BackendRole.NLI: MockNLI,
    BackendRole.SRL: MockSRL,
    BackendRole.QG: MockQG,
    BackendRole.QA: MockQA,
}


def make_backend(descriptor: BackendDescriptor, **remote_kwargs):
    """Instantiate the backend a descriptor names."""
    if descriptor.kind is BackendKind.MOCK:
        return _MOCK_FACTORIES[descriptor.role]()
    return _REMOTE_CLASSES[descriptor.role](descriptor, **remote_kwargs)
