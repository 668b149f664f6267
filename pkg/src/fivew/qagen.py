"""Question-answer pair generation from role-labeled frames.

The replaced role span is the gold answer. Two engines: a deterministic
template (span → question word, terminal punctuation → "?") and a pluggable
generative backend that receives (claim, question word, answer span) and
returns the question text, falling back to the template on failure unless
strict mode is on.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .backends import BackendError
from .textmetrics import strip_terminal_punct
from .srl5w import FiveW, MappingTable, DEFAULT_TABLE, QUESTION_WS, RoleSpan, SRLFrame, extract_5w

log = logging.getLogger(__name__)


class QAGenMode(enum.Enum):
    TEMPLATE = "template"
    GENERATIVE = "generative"


class PairSource(enum.Enum):
    TEMPLATE = "template"
    GENERATIVE = "generative"


@dataclass(frozen=True)
class FiveWQAPair:
    claim_id: str
    w: FiveW
    verb_text: str
    question: str
    gold_answer: str
    source: PairSource

    def __post_init__(self) -> None:
        if not self.question.endswith("?"):
            raise ValueError("question must end with '?'")
        if self.source is PairSource.TEMPLATE and self.w.value not in self.question.lower():
            raise ValueError("template question must contain its question word")


def _is_punct_token(token: str) -> bool:
    return strip_terminal_punct(token) == "" or all(not ch.isalnum() for ch in token)


def gen_question_template(frame: SRLFrame, w: FiveW, span: RoleSpan) -> FiveWQAPair:
    """Replace the span's tokens with the question word, keep every other
    token verbatim, turn terminal punctuation into "?", capitalize the first
    character."""
    tokens = list(frame.sentence_tokens)
    out = tokens[: span.start] + [w.value] + tokens[span.end :]
    if out and _is_punct_token(out[-1]):
        out = out[:-1]
    question = strip_terminal_punct(" ".join(out)) + "?"
    question = question[0].upper() + question[1:]
    return FiveWQAPair(
        claim_id=frame.claim_id,
        w=w,
        verb_text=frame.verb_text,
        question=question,
        gold_answer=span.text,
        source=PairSource.TEMPLATE,
    )


def gen_question_backend(
    claim: str,
    w: FiveW,
    span: RoleSpan,
    backend,
    frame: Optional[SRLFrame] = None,
    strict: bool = False,
) -> FiveWQAPair:
    """Ask the generative backend for a question about the span.

    The gold answer stays the span text regardless of what the backend
    produces. On backend failure the template engine takes over with a
    warning (strict mode re-raises instead); the fallback needs the frame.
    """
    claim_id = frame.claim_id if frame is not None else ""
    verb_text = frame.verb_text if frame is not None else ""
    try:
        question = backend.qg(claim, w, span.text)
    except BackendError as exc:
        if strict or frame is None:
            raise
        log.warning(
            "claim %s: question backend failed (%s); using template", claim_id, exc
        )
        return gen_question_template(frame, w, span)
    if not question.endswith("?"):
        question = strip_terminal_punct(question) + "?"
    return FiveWQAPair(
        claim_id=claim_id,
        w=w,
        verb_text=verb_text,
        question=question,
        gold_answer=span.text,
        source=PairSource.GENERATIVE,
    )


def generate_qapairs(
    claim_record,
    frames: Sequence[SRLFrame],
    table: MappingTable = DEFAULT_TABLE,
    mode: QAGenMode = QAGenMode.TEMPLATE,
    backend=None,
    include_how: bool = False,
    strict: bool = False,
) -> list[FiveWQAPair]:
    """One pair per frame per question word present; absent words produce
    nothing, so a claim yields at most five pairs per verb.

    claim_record needs only .id and .claim (text). All frames must carry
    the record's id.
    """
    claim_id, claim_text = claim_record.id, claim_record.claim
    for frame in frames:
        if frame.claim_id != claim_id:
            raise ValueError(
                f"frame for claim {frame.claim_id!r} passed with record {claim_id!r}"
            )
    if mode is QAGenMode.GENERATIVE and backend is None:
        raise ValueError("generative mode requires a question-generation backend")
    wanted = QUESTION_WS + ((FiveW.HOW,) if include_how else ())
    pairs: list[FiveWQAPair] = []
    for frame in frames:
        extracted = extract_5w(frame, table)
        for w in wanted:
            span = extracted.get(w)
            if span is None:
                continue
            if mode is QAGenMode.TEMPLATE:
                pairs.append(gen_question_template(frame, w, span))
            else:
                pairs.append(
                    gen_question_backend(
                        claim_text, w, span, backend, frame=frame, strict=strict
                    )
                )
    return pairs


# --- serialization -----------------------------------------------------------


def pair_to_record(pair: FiveWQAPair) -> dict:
    return {
        "claim_id": pair.claim_id,
        "w": pair.w.value,
        "verb": pair.verb_text,
        "question": pair.question,
        "gold_answer": pair.gold_answer,
        "source": pair.source.value,
    }


def pair_from_record(record: Mapping) -> FiveWQAPair:
    return FiveWQAPair(
        claim_id=record["claim_id"],
        w=FiveW(record["w"]),
        verb_text=record["verb"],
        question=record["question"],
        gold_answer=record["gold_answer"],
        source=PairSource(record["source"]),
    )


def render_pairs(pairs: Iterable[FiveWQAPair]) -> str:
    lines = [json.dumps(pair_to_record(p), ensure_ascii=False) for p in pairs]
    return "\n".join(lines) + ("\n" if lines else "")
