"""Request/response schemas for the five inference endpoints.

Every model is strict about field names: unknown fields are rejected so a
misspelled key surfaces as a 400 instead of being silently dropped.  The one
deliberate exception is the optional ``sampling`` flag on request bodies —
clients that never heard of it simply omit it, and bindings that cannot
sample ignore it.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

WireW = Literal["who", "what", "when", "where", "why", "how"]
WireNLILabel = Literal["entailment", "neutral", "contradiction"]
WireRole = Literal[
    "ARG0",
    "ARG1",
    "ARG2",
    "ARG3",
    "ARG4",
    "ARGM-TMP",
    "ARGM-LOC",
    "ARGM-CAU",
    "ARGM-ADV",
    "ARGM-MNR",
    "ARGM-MOD",
    "ARGM-DIR",
    "ARGM-DIS",
    "ARGM-NEG",
]

_SCORE_SUM_TOLERANCE = 1e-6


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _SamplingRequest(_StrictModel):
    """Base for request bodies; ``sampling`` requests non-deterministic
    decoding from bindings that support it and is ignored everywhere else."""

    sampling: bool = False


class ParaphraseRequest(_SamplingRequest):
    text: str = Field(min_length=1)
    n: int = Field(ge=0)


class ParaphraseResponse(_StrictModel):
    paraphrases: list[str]


class NLIRequest(_SamplingRequest):
    premise: str = Field(min_length=1)
    hypothesis: str = Field(min_length=1)


class NLIResponse(_StrictModel):
    label: WireNLILabel
    scores: list[float] = Field(min_length=3, max_length=3)

    @model_validator(mode="after")
    def _check_scores(self) -> "NLIResponse":
        if any(s < 0.0 or s > 1.0 for s in self.scores):
            raise ValueError("scores must lie in [0, 1]")
        if abs(sum(self.scores) - 1.0) > _SCORE_SUM_TOLERANCE:
            raise ValueError("scores must sum to 1")
        return self


class SRLRequest(_SamplingRequest):
    text: str = Field(min_length=1)


class WireSpan(_StrictModel):
    role: WireRole
    start: int = Field(ge=0)
    end: int = Field(ge=1)


class WireFrame(_StrictModel):
    tokens: list[str]
    verb_index: int = Field(ge=0)
    spans: list[WireSpan]

    @model_validator(mode="after")
    def _check_bounds(self) -> "WireFrame":
        if self.verb_index >= len(self.tokens):
            raise ValueError("verb_index outside tokens")
        for span in self.spans:
            if not (span.start < span.end <= len(self.tokens)):
                raise ValueError("span outside tokens")
        return self


class SRLResponse(_StrictModel):
    frames: list[WireFrame]


class QGRequest(_SamplingRequest):
    claim: str = Field(min_length=1)
    w: WireW
    answer_span: str = Field(min_length=1)


class QGResponse(_StrictModel):
    question: str = Field(min_length=1)


class QARequest(_SamplingRequest):
    question: str = Field(min_length=1)
    context: str = Field(min_length=1)


class QAResponse(_StrictModel):
    answer: str  # empty string means "no answer found"
    score: float = Field(ge=0.0, le=1.0)


class HealthResponse(_StrictModel):
    status: Literal["ok"]
    roles: list[str]


class ErrorResponse(_StrictModel):
    error: str
    detail: Optional[str] = None


REQUEST_MODELS = {
    "paraphrase": ParaphraseRequest,
    "nli": NLIRequest,
    "srl": SRLRequest,
    "qg": QGRequest,
    "qa": QARequest,
}

RESPONSE_MODELS = {
    "paraphrase": ParaphraseResponse,
    "nli": NLIResponse,
    "srl": SRLResponse,
    "qg": QGResponse,
    "qa": QAResponse,
}
