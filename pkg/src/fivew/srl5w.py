"""Semantic-role frames and their projection onto question words.

Ingests verb-centric role frames from a newline-delimited file, maps
argument labels to Who/What/When/Where/Why/How via a configurable lookup
table, and computes per-aspect presence statistics over a corpus.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .textmetrics import TokenSeq

log = logging.getLogger(__name__)


class PropBankRole(enum.Enum):
    ARG0 = "ARG0"
    ARG1 = "ARG1"
    ARG2 = "ARG2"
    ARG3 = "ARG3"
    ARG4 = "ARG4"
    ARGM_TMP = "ARGM-TMP"
    ARGM_LOC = "ARGM-LOC"
    ARGM_CAU = "ARGM-CAU"
    ARGM_ADV = "ARGM-ADV"
    ARGM_MNR = "ARGM-MNR"
    ARGM_MOD = "ARGM-MOD"
    ARGM_DIR = "ARGM-DIR"
    ARGM_DIS = "ARGM-DIS"
    ARGM_NEG = "ARGM-NEG"


class FiveW(enum.Enum):
    WHO = "who"
    WHAT = "what"
    WHEN = "when"
    WHERE = "where"
    WHY = "why"
    HOW = "how"


#: Question-generation default: the how aspect is representable but skipped.
QUESTION_WS: tuple[FiveW, ...] = (
    FiveW.WHO,
    FiveW.WHAT,
    FiveW.WHEN,
    FiveW.WHERE,
    FiveW.WHY,
)


@dataclass(frozen=True)
class RoleSpan:
    role: PropBankRole
    start: int
    end: int  # exclusive
    text: str


@dataclass(frozen=True)
class SRLFrame:
    """One verb of one claim, with its labeled argument spans."""

    claim_id: str
    sentence_tokens: TokenSeq
    verb_index: int
    verb_text: str
    spans: tuple[RoleSpan, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "spans", tuple(self.spans))
        n = len(self.sentence_tokens)
        if not 0 <= self.verb_index < n:
            raise ValueError(f"verb_index {self.verb_index} outside sentence of {n} tokens")
        if self.verb_text != self.sentence_tokens[self.verb_index]:
            raise ValueError("verb_text does not match the token at verb_index")
        occupied: set[int] = {self.verb_index}
        for span in self.spans:
            if not 0 <= span.start < span.end <= n:
                raise ValueError(
                    f"span {span.role.value} [{span.start},{span.end}) outside sentence of {n} tokens"
                )
            covered = set(range(span.start, span.end))
            if covered & occupied:
                raise ValueError(f"span {span.role.value} overlaps the verb or another span")
            occupied |= covered
            expected = " ".join(self.sentence_tokens[span.start : span.end])
            if span.text != expected:
                raise ValueError(f"span text {span.text!r} does not match tokens {expected!r}")


@dataclass(frozen=True)
class MappingTable:
    """Total map from argument label to question word (or none)."""

    entries: Mapping[PropBankRole, Optional[FiveW]]

    def __post_init__(self) -> None:
        missing = set(PropBankRole) - set(self.entries)
        if missing:
            raise ValueError(f"mapping table missing roles: {sorted(r.value for r in missing)}")
        extra = set(self.entries) - set(PropBankRole)
        if extra:
            raise ValueError(f"mapping table has unknown keys: {extra}")
        object.__setattr__(self, "entries", dict(self.entries))


DEFAULT_TABLE = MappingTable(
    {
        **{role: None for role in PropBankRole},
        PropBankRole.ARG0: FiveW.WHO,
        PropBankRole.ARG1: FiveW.WHAT,
        PropBankRole.ARGM_TMP: FiveW.WHEN,
        PropBankRole.ARGM_LOC: FiveW.WHERE,
        PropBankRole.ARGM_CAU: FiveW.WHY,
        PropBankRole.ARGM_MNR: FiveW.HOW,
    }
)


@dataclass(frozen=True)
class WPresence:
    """How many claims of a corpus surface each question word."""

    corpus_size: int
    counts: Mapping[FiveW, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        counts = {w: int(self.counts.get(w, 0)) for w in FiveW}
        for w, c in counts.items():
            if not 0 <= c <= self.corpus_size:
                raise ValueError(f"count for {w.value} outside [0, corpus_size]")
        object.__setattr__(self, "counts", counts)

    @property
    def fractions(self) -> dict[FiveW, float]:
        if self.corpus_size == 0:
            return {w: 0.0 for w in FiveW}
        return {w: self.counts[w] / self.corpus_size for w in FiveW}


class FrameParseError(ValueError):
    """Malformed frame-file record; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_frames(document: str) -> list[SRLFrame]:
    """Parse newline-delimited frame records into validated frames.

    Each non-blank line is an object {claim_id, tokens, verb_index,
    spans: [{role, start, end}]}; span text is derived from the tokens.
    """
    frames: list[SRLFrame] = []
    for line_no, line in enumerate(document.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FrameParseError(line_no, f"invalid record: {exc}") from exc
        if not isinstance(record, dict):
            raise FrameParseError(line_no, "record is not an object")
        try:
            claim_id = record["claim_id"]
            tokens = record["tokens"]
            verb_index = record["verb_index"]
            raw_spans = record["spans"]
        except KeyError as exc:
            raise FrameParseError(line_no, f"missing field {exc.args[0]!r}") from exc
        if not isinstance(claim_id, str) or not claim_id:
            raise FrameParseError(line_no, "claim_id must be a non-empty string")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise FrameParseError(line_no, "tokens must be a list of strings")
        if not isinstance(verb_index, int) or isinstance(verb_index, bool):
            raise FrameParseError(line_no, "verb_index must be an integer")
        if not isinstance(raw_spans, list):
            raise FrameParseError(line_no, "spans must be a list")
        spans = []
        for raw in raw_spans:
            if not isinstance(raw, dict):
                raise FrameParseError(line_no, "span is not an object")
            try:
                role_label, start, end = raw["role"], raw["start"], raw["end"]
            except KeyError as exc:
                raise FrameParseError(line_no, f"span missing field {exc.args[0]!r}") from exc
            try:
                role = PropBankRole(role_label)
            except ValueError:
                raise FrameParseError(line_no, f"unknown role label {role_label!r}") from None
            if not isinstance(start, int) or not isinstance(end, int):
                raise FrameParseError(line_no, "span start/end must be integers")
            if not 0 <= start < end <= len(tokens):
                raise FrameParseError(
                    line_no, f"span [{start},{end}) outside sentence of {len(tokens)} tokens"
                )
            spans.append(RoleSpan(role, start, end, " ".join(tokens[start:end])))
        if not 0 <= verb_index < len(tokens):
            raise FrameParseError(line_no, f"verb_index {verb_index} outside sentence")
        try:
            frames.append(
                SRLFrame(
                    claim_id=claim_id,
                    sentence_tokens=TokenSeq(tuple(tokens)),
                    verb_index=verb_index,
                    verb_text=tokens[verb_index],
                    spans=tuple(spans),
                )
            )
        except ValueError as exc:
            raise FrameParseError(line_no, str(exc)) from exc
    return frames


def render_frames(frames: Iterable[SRLFrame]) -> str:
    """Inverse of parse_frames: one single-line record per frame."""
    lines = []
    for frame in frames:
        record = {
            "claim_id": frame.claim_id,
            "tokens": list(frame.sentence_tokens),
            "verb_index": frame.verb_index,
            "spans": [
                {"role": s.role.value, "start": s.start, "end": s.end} for s in frame.spans
            ],
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def map_role(role: PropBankRole, table: MappingTable = DEFAULT_TABLE) -> Optional[FiveW]:
    """Pure lookup: which question word (if any) a role projects to."""
    return table.entries[role]


def extract_5w(frame: SRLFrame, table: MappingTable = DEFAULT_TABLE) -> dict[FiveW, RoleSpan]:
    """Project a frame's spans onto question words.

    When two spans map to the same word, the earlier-starting span wins and
    the loser is reported via a warning.
    """
    result: dict[FiveW, RoleSpan] = {}
    for span in sorted(frame.spans, key=lambda s: s.start):
        w = map_role(span.role, table)
        if w is None:
            continue
        if w in result:
            log.warning(
                "claim %s verb %r: span %r also maps to %s; keeping earlier span %r",
                frame.claim_id,
                frame.verb_text,
                span.text,
                w.value,
                result[w].text,
            )
            continue
        result[w] = span
    return result


def w_presence(
    frames_per_claim: Iterable[Sequence[SRLFrame]],
    table: MappingTable = DEFAULT_TABLE,
) -> WPresence:
    """Count, per question word, the claims where any frame yields it."""
    counts = {w: 0 for w in FiveW}
    size = 0
    for frames in frames_per_claim:
        size += 1
        present: set[FiveW] = set()
        for frame in frames:
            present |= set(extract_5w(frame, table))
        for w in present:
            counts[w] += 1
    return WPresence(corpus_size=size, counts=counts)


def load_mapping_table(text: str, base: MappingTable = DEFAULT_TABLE) -> MappingTable:
    """Apply a two-column tab-separated override file to a base table.

    Each non-blank, non-comment line is "<role>\\t<w>" with "-" meaning the
    role maps to nothing. Unlisted roles keep their base mapping.
    """
    entries = dict(base.entries)
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise ValueError(f"line {line_no}: expected two tab-separated columns")
        role_label, w_label = parts[0].strip(), parts[1].strip()
        try:
            role = PropBankRole(role_label)
        except ValueError:
            raise ValueError(f"line {line_no}: unknown role label {role_label!r}") from None
        if w_label == "-":
            entries[role] = None
        else:
            try:
                entries[role] = FiveW(w_label.lower())
            except ValueError:
                raise ValueError(f"line {line_no}: unknown question word {w_label!r}") from None
    return MappingTable(entries)
