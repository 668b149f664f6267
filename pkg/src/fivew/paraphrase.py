"""Paraphrase acquisition and filtering pipeline.

For each claim: obtain up to n candidate paraphrases from a backend, drop
near-copies with a word-edit-distance coverage filter, drop meaning changes
with an entailment correctness filter, then score the survivors' linguistic
diversity (mean inverse BLEU against the claim and the other survivors).
Per-model comparison reports aggregate coverage, correctness and diversity.
"""

from __future__ import annotations

import enum
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from statistics import fmean
from typing import Mapping, Optional, Sequence

from .backends import BackendError, NLILabel
from .textmetrics import CASEFOLD, BleuConfig, DEFAULT_BLEU, inv_bleu, med, tokenize

log = logging.getLogger(__name__)

DEFAULT_N = 5
DEFAULT_MED_THRESHOLD = 2


class CandidateStatus(enum.Enum):
    KEPT = "kept"
    DROPPED_COVERAGE = "dropped_coverage"
    DROPPED_CORRECTNESS = "dropped_correctness"


@dataclass(frozen=True)
class ParaphraseCandidate:
    """One generated paraphrase and everything the pipeline decided about it.

    status None means "not yet filtered"; nli_label is only ever set for
    candidates that passed the coverage filter, diversity_d only for kept
    ones.
    """

    claim_id: str
    index: int  # 1-based generation position
    text: str
    med_to_claim: int
    nli_label: Optional[NLILabel] = None
    diversity_d: Optional[float] = None
    status: Optional[CandidateStatus] = None

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("index is 1-based")
        if self.med_to_claim < 0:
            raise ValueError("edit distance cannot be negative")


@dataclass(frozen=True)
class ParaphraseModelReport:
    model_id: str
    coverage_mean_kept: float  # mean coverage-surviving candidates per claim
    coverage_pass_fraction: float  # coverage survivors / generated
    correctness_fraction: float  # entailed / coverage survivors
    diversity_mean: float  # mean d over kept candidates
    per_index_diversity: tuple[tuple[int, float], ...]  # (index, mean d), 1..n
    incomplete: bool = False
    error: str = ""


class PipelineError(Exception):
    """A backend failed while processing one claim; safe to retry."""

    def __init__(self, claim_id: str, message: str) -> None:
        super().__init__(f"claim {claim_id}: {message}")
        self.claim_id = claim_id


@dataclass(frozen=True)
class ParaphraseSettings:
    n: int = DEFAULT_N
    med_threshold: int = DEFAULT_MED_THRESHOLD
    bleu: BleuConfig = DEFAULT_BLEU
    bidirectional_nli: bool = False
    jobs: int = 1


DEFAULT_SETTINGS = ParaphraseSettings()


def _med_to_claim(claim: str, candidate: str) -> int:
    return med(tokenize(claim, {CASEFOLD}), tokenize(candidate, {CASEFOLD}))


def generate_candidates(
    claim: str,
    n: int,
    backend,
    claim_id: str = "",
) -> list[ParaphraseCandidate]:
    """Ask the backend for up to n paraphrases; under-delivery is allowed.

    Candidates come back unfiltered (status unset) with their word edit
    distance to the claim precomputed on casefolded tokens.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    try:
        texts = backend.paraphrase(claim, n)
    except BackendError as exc:
        raise PipelineError(claim_id, f"paraphrase backend failed: {exc}") from exc
    if len(texts) > n:
        texts = texts[:n]
    return [
        ParaphraseCandidate(
            claim_id=claim_id,
            index=i,
            text=text,
            med_to_claim=_med_to_claim(claim, text),
        )
        for i, text in enumerate(texts, start=1)
    ]


def dedup_candidates(
    candidates: Sequence[ParaphraseCandidate],
) -> tuple[list[ParaphraseCandidate], int]:
    """Drop later exact (casefolded) duplicates; returns (unique, dropped)."""
    seen: set[str] = set()
    unique: list[ParaphraseCandidate] = []
    for cand in candidates:
        key = cand.text.casefold()
        if key in seen:
            continue
        seen.add(key)
        unique.append(cand)
    return unique, len(candidates) - len(unique)


def filter_coverage(
    candidates: Sequence[ParaphraseCandidate],
    threshold: int = DEFAULT_MED_THRESHOLD,
) -> list[ParaphraseCandidate]:
    """Coverage rule: a candidate survives iff its edit distance to the
    claim is strictly greater than the threshold.

    Survivors not previously judged are marked Kept; candidates already
    dropped for correctness stay dropped (re-running the filter is a no-op).
    """
    out = []
    for cand in candidates:
        if cand.med_to_claim <= threshold:
            out.append(replace(cand, status=CandidateStatus.DROPPED_COVERAGE))
        elif cand.status is None:
            out.append(replace(cand, status=CandidateStatus.KEPT))
        else:
            out.append(cand)
    return out


def filter_correctness(
    candidates: Sequence[ParaphraseCandidate],
    claim: str,
    backend,
    bidirectional: bool = False,
) -> list[ParaphraseCandidate]:
    """Correctness rule: a coverage survivor stays kept iff the backend
    judges claim ⇒ candidate as entailment (both directions when
    bidirectional).

    Candidates dropped by coverage are never sent to the backend; labels
    already present are reused, so the filter is idempotent.
    """
    out = []
    for cand in candidates:
        if cand.status is CandidateStatus.DROPPED_COVERAGE:
            out.append(cand)
            continue
        label = cand.nli_label
        if label is None:
            try:
                label = backend.nli(claim, cand.text).label
                if bidirectional and label is NLILabel.ENTAILMENT:
                    label = backend.nli(cand.text, claim).label
            except BackendError as exc:
                raise PipelineError(cand.claim_id, f"nli backend failed: {exc}") from exc
        status = (
            CandidateStatus.KEPT
            if label is NLILabel.ENTAILMENT
            else CandidateStatus.DROPPED_CORRECTNESS
        )
        out.append(replace(cand, nli_label=label, status=status))
    return out


def score_diversity(
    claim: str,
    candidates: Sequence[ParaphraseCandidate],
    config: BleuConfig = DEFAULT_BLEU,
) -> list[ParaphraseCandidate]:
    """Attach d_j to each kept candidate: the mean inverse BLEU over the
    claim and every other kept candidate, each compared against p_j."""
    kept = [c for c in candidates if c.status is CandidateStatus.KEPT]
    scores: dict[tuple[str, int], float] = {}
    for cand in kept:
        others = [claim] + [k.text for k in kept if k is not cand]
        scores[(cand.claim_id, cand.index)] = fmean(
            inv_bleu(other, cand.text, config) for other in others
        )
    return [
        replace(c, diversity_d=scores[(c.claim_id, c.index)])
        if c.status is CandidateStatus.KEPT
        else c
        for c in candidates
    ]


def run_pipeline(
    claim_id: str,
    claim: str,
    paraphraser,
    nli,
    settings: ParaphraseSettings = DEFAULT_SETTINGS,
) -> list[ParaphraseCandidate]:
    """Generate → dedup → coverage → correctness → diversity for one claim."""
    candidates = generate_candidates(claim, settings.n, paraphraser, claim_id=claim_id)
    candidates, dropped = dedup_candidates(candidates)
    if dropped:
        log.debug("claim %s: %d duplicate candidates removed", claim_id, dropped)
    candidates = filter_coverage(candidates, settings.med_threshold)
    candidates = filter_correctness(
        candidates, claim, nli, bidirectional=settings.bidirectional_nli
    )
    return score_diversity(claim, candidates, settings.bleu)


def _model_report(
    model_id: str,
    claims: Sequence[tuple[str, str]],
    paraphraser,
    nli,
    settings: ParaphraseSettings,
) -> ParaphraseModelReport:
    per_claim: list[list[ParaphraseCandidate]] = []

    def one(claim_pair: tuple[str, str]) -> list[ParaphraseCandidate]:
        claim_id, text = claim_pair
        return run_pipeline(claim_id, text, paraphraser, nli, settings)

    if settings.jobs > 1:
        with ThreadPoolExecutor(max_workers=settings.jobs) as pool:
            per_claim = list(pool.map(one, claims))
    else:
        per_claim = [one(pair) for pair in claims]

    flat = [c for group in per_claim for c in group]
    generated = len(flat)
    survivors = [c for c in flat if c.status is not CandidateStatus.DROPPED_COVERAGE]
    kept = [c for c in flat if c.status is CandidateStatus.KEPT]
    per_index: list[tuple[int, float]] = []
    for index in range(1, settings.n + 1):
        ds = [c.diversity_d for c in kept if c.index == index]
        if ds:
            per_index.append((index, fmean(ds)))
    return ParaphraseModelReport(
        model_id=model_id,
        coverage_mean_kept=(
            fmean(
                sum(
                    1
                    for c in group
                    if c.status is not CandidateStatus.DROPPED_COVERAGE
                )
                for group in per_claim
            )
            if per_claim
            else 0.0
        ),
        coverage_pass_fraction=len(survivors) / generated if generated else 0.0,
        correctness_fraction=len(kept) / len(survivors) if survivors else 0.0,
        diversity_mean=fmean([c.diversity_d for c in kept]) if kept else 0.0,
        per_index_diversity=tuple(per_index),
    )


def compare_models(
    claims: Sequence[tuple[str, str]],
    model_ids: Sequence[str],
    backends: Mapping[str, object],
    nli,
    settings: ParaphraseSettings = DEFAULT_SETTINGS,
) -> list[ParaphraseModelReport]:
    """One report per model over the same claims.

    A model whose backend fails mid-run yields an incomplete report instead
    of aborting the comparison.
    """
    missing = [m for m in model_ids if m not in backends]
    if missing:
        raise ValueError(f"no backend for models: {missing}")
    reports = []
    for model_id in model_ids:
        try:
            reports.append(
                _model_report(model_id, claims, backends[model_id], nli, settings)
            )
        except PipelineError as exc:
            log.warning("model %s: %s", model_id, exc)
            reports.append(
                ParaphraseModelReport(
                    model_id=model_id,
                    coverage_mean_kept=0.0,
                    coverage_pass_fraction=0.0,
                    correctness_fraction=0.0,
                    diversity_mean=0.0,
                    per_index_diversity=(),
                    incomplete=True,
                    error=str(exc),
                )
            )
    return reports


# --- serialization ------------------------------------------------------------


def candidate_to_record(cand: ParaphraseCandidate) -> dict:
    return {
        "claim_id": cand.claim_id,
        "index": cand.index,
        "text": cand.text,
        "med_to_claim": cand.med_to_claim,
        "nli_label": cand.nli_label.value if cand.nli_label else None,
        "diversity_d": cand.diversity_d,
        "status": cand.status.value if cand.status else None,
    }


def candidate_from_record(record: Mapping) -> ParaphraseCandidate:
    return ParaphraseCandidate(
        claim_id=record["claim_id"],
        index=record["index"],
        text=record["text"],
        med_to_claim=record["med_to_claim"],
        nli_label=NLILabel(record["nli_label"]) if record.get("nli_label") else None,
        diversity_d=record.get("diversity_d"),
        status=CandidateStatus(record["status"]) if record.get("status") else None,
    )


def render_candidates(candidates: Sequence[ParaphraseCandidate]) -> str:
    lines = [json.dumps(candidate_to_record(c), ensure_ascii=False) for c in candidates]
    return "\n".join(lines) + ("\n" if lines else "")


def report_to_record(report: ParaphraseModelReport) -> dict:
    return {
        "model_id": report.model_id,
        "coverage_mean_kept": report.coverage_mean_kept,
        "coverage_pass_fraction": report.coverage_pass_fraction,
        "correctness_fraction": report.correctness_fraction,
        "diversity_mean": report.diversity_mean,
        "per_index_diversity": [[i, d] for i, d in report.per_index_diversity],
        "incomplete": report.incomplete,
        "error": report.error,
    }
