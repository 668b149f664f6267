"""Unified claim corpus: ingestion, deduplication, splitting, statistics,
and newline-delimited serialization with byte-stable round-trips.

A record ties one claim to its entailment class, evidence passages,
paraphrase candidates, and question-answer pairs. Source files arrive in a
generic per-line format via adapters keyed by dataset tag.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .paraphrase import ParaphraseCandidate, candidate_from_record, candidate_to_record
from .qagen import FiveWQAPair, pair_from_record, pair_to_record

log = logging.getLogger(__name__)

SOURCES = ("fever", "hover", "vitc", "faviq", "factify1", "factify2", "other")


class EntailmentClass(enum.Enum):
    SUPPORT = "support"
    NEUTRAL = "neutral"
    REFUTE = "refute"


def _text_key(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class EvidencePassage:
    text: str
    doc_key: str = ""

    def __post_init__(self) -> None:
        if not self.doc_key:
            object.__setattr__(self, "doc_key", _text_key(self.text))


@dataclass(frozen=True)
class ClaimRecord:
    id: str
    source: str
    claim: str
    label: EntailmentClass
    evidence: tuple[EvidencePassage, ...] = ()
    paraphrases: tuple[ParaphraseCandidate, ...] = ()
    qa_pairs: tuple[FiveWQAPair, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("record id must be non-empty")
        if not self.claim.strip():
            raise ValueError("claim must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source tag {self.source!r}")
        object.__setattr__(self, "evidence", tuple(self.evidence))
        object.__setattr__(self, "paraphrases", tuple(self.paraphrases))
        object.__setattr__(self, "qa_pairs", tuple(self.qa_pairs))
        if self.label is not EntailmentClass.REFUTE and not self.evidence:
            # support/neutral claims normally cite evidence; flag, don't fail
            log.debug("record %s (%s) has no evidence", self.id, self.label.value)


@dataclass(frozen=True)
class ClassStats:
    claims: int = 0
    paraphrases: int = 0
    qa_pairs: int = 0
    evidence_docs: int = 0

    def __add__(self, other: "ClassStats") -> "ClassStats":
        return ClassStats(
            self.claims + other.claims,
            self.paraphrases + other.paraphrases,
            self.qa_pairs + other.qa_pairs,
            self.evidence_docs + other.evidence_docs,
        )


@dataclass(frozen=True)
class CorpusStats:
    per_class: Mapping[EntailmentClass, ClassStats]
    per_source: Mapping[str, int]
    totals: ClassStats


class CorpusParseError(ValueError):
    """Malformed corpus/source line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# --- ingestion -------------------------------------------------------------


def _parse_generic_record(record: Mapping, line_no: int, source: str) -> ClaimRecord:
    claim = record.get("claim")
    if not isinstance(claim, str) or not claim.strip():
        raise CorpusParseError(line_no, "missing or empty claim text")
    raw_label = record.get("label")
    if not isinstance(raw_label, str):
        raise CorpusParseError(line_no, "missing label")
    try:
        label = EntailmentClass(raw_label.lower())
    except ValueError:
        raise CorpusParseError(line_no, f"unknown label {raw_label!r}") from None
    record_id = record.get("id") or f"{source}-{line_no:06d}"
    if not isinstance(record_id, str):
        record_id = str(record_id)
    evidence = []
    for item in record.get("evidence") or []:
        if isinstance(item, str):
            evidence.append(EvidencePassage(text=item))
        elif isinstance(item, Mapping) and isinstance(item.get("text"), str):
            evidence.append(
                EvidencePassage(text=item["text"], doc_key=item.get("doc_key") or "")
            )
        else:
            raise CorpusParseError(line_no, "evidence items must be strings or objects")
    # any other fields (image paths, OCR blobs, ...) are text-irrelevant and dropped
    return ClaimRecord(
        id=record_id,
        source=source,
        claim=claim,
        label=label,
        evidence=tuple(evidence),
    )


def parse_source(text: str, adapter_id: str) -> tuple[list[ClaimRecord], list[str]]:
    """Parse a source file's content; returns (records, per-record problems).

    Unknown adapter tags abort; individual bad records are skipped and
    reported with their line number.
    """
    if adapter_id not in SOURCES and adapter_id != "generic":
        raise ValueError(f"unknown adapter tag {adapter_id!r}")
    source = adapter_id if adapter_id != "generic" else "other"
    records: list[ClaimRecord] = []
    problems: list[str] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append(f"line {line_no}: invalid record: {exc}")
            continue
        if not isinstance(raw, Mapping):
            problems.append(f"line {line_no}: record is not an object")
            continue
        try:
            records.append(_parse_generic_record(raw, line_no, source))
        except CorpusParseError as exc:
            problems.append(str(exc))
    return records, problems


def ingest_source(path: "str | Path", adapter_id: str) -> list[ClaimRecord]:
    """Read and normalize one source file; per-record problems are logged."""
    text = Path(path).read_text(encoding="utf-8")
    records, problems = parse_source(text, adapter_id)
    for problem in problems:
        log.warning("%s [%s]: %s", path, adapter_id, problem)
    return records


# --- dedup -------------------------------------------------------------------


def _claim_key(claim: str) -> str:
    return " ".join(claim.split()).casefold()


def dedup(records: Sequence[ClaimRecord]) -> tuple[list[ClaimRecord], int]:
    """Drop later records whose normalized claim text was already seen."""
    seen: set[str] = set()
    kept: list[ClaimRecord] = []
    for record in records:
        key = _claim_key(record.claim)
        if key in seen:
            continue
        seen.add(key)
        kept.append(record)
    return kept, len(records) - len(kept)


# --- split -------------------------------------------------------------------

SPLIT_NAMES = ("train", "dev", "test")


def _largest_remainder(total: int, fractions: Sequence[float]) -> list[int]:
    """Integer allocation of `total` by fractions (assumed to sum to 1):
    floor everything, then hand out the leftover by descending fractional
    part, earlier entries winning ties."""
    ideal = [frac * total for frac in fractions]
    counts = [int(x) for x in ideal]
    leftover = total - sum(counts)
    order = sorted(
        range(len(fractions)), key=lambda i: (-(ideal[i] - counts[i]), i)
    )
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def split(
    records: Sequence[ClaimRecord],
    fractions: Sequence[float],
    seed: int,
) -> dict[str, list[ClaimRecord]]:
    """Label-stratified random partition into train/dev/test.

    Global sizes are exact (largest-remainder on the full count); records
    are dealt per label group against running capacity, so per-class
    proportions track the fractions. When the fractions sum to less than 1
    the remainder of the corpus is left out.
    """
    fracs = [float(f) for f in fractions]
    if len(fracs) != 3:
        raise ValueError("exactly three fractions required (train, dev, test)")
    if any(f <= 0 for f in fracs):
        raise ValueError("fractions must be positive")
    total_frac = sum(fracs)
    if total_frac > 1.0 + 1e-9:
        raise ValueError("fractions must sum to at most 1")

    # unallocated mass goes to a discard bucket so the arithmetic is uniform
    all_fracs = fracs + [max(0.0, 1.0 - total_frac)]
    capacity = _largest_remainder(len(records), all_fracs)

    groups: dict[EntailmentClass, list[ClaimRecord]] = {}
    for record in records:
        groups.setdefault(record.label, []).append(record)

    rng = random.Random(seed)
    out: dict[str, list[ClaimRecord]] = {name: [] for name in SPLIT_NAMES}
    assigned = [0, 0, 0, 0]
    for label in sorted(groups, key=lambda l: l.value):
        group = list(groups[label])
        rng.shuffle(group)
        quotas = _largest_remainder(len(group), all_fracs)
        # respect global capacity: overflow shifts to the next bucket with room
        for i in range(4):
            while quotas[i] > 0 and assigned[i] + quotas[i] > capacity[i]:
                spill = sorted(
                    (j for j in range(4) if assigned[j] + quotas[j] < capacity[j]),
                    key=lambda j: capacity[j] - assigned[j] - quotas[j],
                    reverse=True,
                )
                if not spill:
                    break
                quotas[i] -= 1
                quotas[spill[0]] += 1
        cursor = 0
        for i, name in enumerate(SPLIT_NAMES):
            out[name].extend(group[cursor : cursor + quotas[i]])
            cursor += quotas[i]
            assigned[i] += quotas[i]
        assigned[3] += len(group) - cursor  # discarded remainder
    return out


# --- stats -------------------------------------------------------------------


def stats(records: Sequence[ClaimRecord]) -> CorpusStats:
    """Exact per-class and per-source counts; evidence documents are counted
    distinct by doc_key within each class, totals are plain column sums."""
    per_class_claims = {cls: 0 for cls in EntailmentClass}
    per_class_para = {cls: 0 for cls in EntailmentClass}
    per_class_pairs = {cls: 0 for cls in EntailmentClass}
    per_class_docs: dict[EntailmentClass, set[str]] = {
        cls: set() for cls in EntailmentClass
    }
    per_source: dict[str, int] = {}
    for record in records:
        per_class_claims[record.label] += 1
        per_class_para[record.label] += len(record.paraphrases)
        per_class_pairs[record.label] += len(record.qa_pairs)
        for passage in record.evidence:
            if passage.text.strip():
                per_class_docs[record.label].add(passage.doc_key)
        per_source[record.source] = per_source.get(record.source, 0) + 1
    per_class = {
        cls: ClassStats(
            claims=per_class_claims[cls],
            paraphrases=per_class_para[cls],
            qa_pairs=per_class_pairs[cls],
            evidence_docs=len(per_class_docs[cls]),
        )
        for cls in EntailmentClass
    }
    totals = ClassStats()
    for cls_stats in per_class.values():
        totals = totals + cls_stats
    return CorpusStats(per_class=per_class, per_source=dict(sorted(per_source.items())), totals=totals)


# --- serialization --------------------------------------------------------------


def record_to_dict(record: ClaimRecord) -> dict:
    return {
        "id": record.id,
        "source": record.source,
        "claim": record.claim,
        "label": record.label.value,
        "evidence": [{"doc_key": p.doc_key, "text": p.text} for p in record.evidence],
        "paraphrases": [candidate_to_record(c) for c in record.paraphrases],
        "qa_pairs": [pair_to_record(p) for p in record.qa_pairs],
    }


def record_from_dict(raw: Mapping) -> ClaimRecord:
    return ClaimRecord(
        id=raw["id"],
        source=raw["source"],
        claim=raw["claim"],
        label=EntailmentClass(raw["label"]),
        evidence=tuple(
            EvidencePassage(text=p["text"], doc_key=p["doc_key"]) for p in raw["evidence"]
        ),
        paraphrases=tuple(candidate_from_record(c) for c in raw["paraphrases"]),
        qa_pairs=tuple(pair_from_record(p) for p in raw["qa_pairs"]),
    )


def render_corpus(records: Iterable[ClaimRecord]) -> str:
    lines = [json.dumps(record_to_dict(r), ensure_ascii=False) for r in records]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_corpus(text: str) -> list[ClaimRecord]:
    records: list[ClaimRecord] = []
    ids: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            record = record_from_dict(raw)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorpusParseError(line_no, f"malformed record: {exc}") from exc
        if record.id in ids:
            raise CorpusParseError(line_no, f"duplicate record id {record.id!r}")
        ids.add(record.id)
        records.append(record)
    return records


def write_corpus(records: Sequence[ClaimRecord], path: "str | Path") -> None:
    Path(path).write_text(render_corpus(records), encoding="utf-8")


def read_corpus(path: "str | Path") -> list[ClaimRecord]:
    return parse_corpus(Path(path).read_text(encoding="utf-8"))
