"""Question-driven claim validation and the generator×reader evaluation grid.

Each question-answer pair is answered from the claim's evidence by a QA
backend, scored against the gold span (BLEU, LCS-based PRF, bag-of-token
PRF), and turned into a per-question-word verdict: not verifiable when the
reader abstains or is below the confidence floor, otherwise supported or
refuted by token F1 against the support threshold.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Mapping, Sequence

from .backends import AnswerResult, BackendError
from .qagen import FiveWQAPair, PairSource
from .srl5w import FiveW, QUESTION_WS
from .textmetrics import CASEFOLD, PRF, ZERO_PRF, bleu, rouge_l, token_prf, tokenize

log = logging.getLogger(__name__)

NO_CLAIM_REASON = "no claim"


class VerdictClass(enum.Enum):
    SUPPORTED = "supported"
    REFUTED = "refuted"
    NOT_VERIFIABLE = "not_verifiable"


class Condition(enum.Enum):
    CLAIM_ONLY = "claim"
    PLUS_PARAPHRASE = "plus-paraphrase"


@dataclass(frozen=True)
class Thresholds:
    tau_support: float = 0.5
    confidence_floor: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau_support <= 1.0:
            raise ValueError("tau_support must lie in [0, 1]")
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise ValueError("confidence_floor must lie in [0, 1]")


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class ScoreBundle:
    bleu: float
    rougeL: PRF
    tokenPRF: PRF


ZERO_SCORES = ScoreBundle(0.0, ZERO_PRF, ZERO_PRF)


@dataclass(frozen=True)
class WVerdict:
    w: FiveW
    question: str
    gold_answer: str
    predicted: AnswerResult
    scores: ScoreBundle
    verdict: VerdictClass
    reason: str = ""


@dataclass(frozen=True)
class ClaimVerdictReport:
    claim_id: str
    verdicts: tuple[WVerdict, ...]  # one per pair, plus "no claim" stubs
    rollup: Mapping[FiveW, VerdictClass]  # one class per question word
    summary: Mapping[VerdictClass, int]  # counts over the rollup
    errors: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvalGridCell:
    qag_model: str
    qa_model: str
    condition: Condition
    bleu: float
    rougeL: float
    recall: float
    f1: float
    n_pairs: int = 0
    incomplete: bool = False
    error: str = ""


def _passage_texts(record) -> list[str]:
    texts = []
    for passage in record.evidence:
        texts.append(passage if isinstance(passage, str) else passage.text)
    return texts


def answer_question(question: str, evidence: Sequence[str], backend) -> AnswerResult:
    """One reader call; empty evidence short-circuits to a no-answer result.

    Backend failures propagate — an error is never conflated with "the
    reader found nothing".
    """
    if not evidence:
        return AnswerResult(question, "", 0.0)
    return backend.answer(question, list(evidence))


def score_answer(predicted: AnswerResult, gold_answer: str) -> ScoreBundle:
    """All three metric families on casefolded word tokens; an empty
    prediction (or empty gold) scores zero everywhere."""
    pred = tokenize(predicted.answer_text, {CASEFOLD})
    gold = tokenize(gold_answer, {CASEFOLD})
    if not len(pred) or not len(gold):
        return ZERO_SCORES
    return ScoreBundle(
        bleu=bleu(pred, [gold]),
        rougeL=rouge_l(pred, gold),
        tokenPRF=token_prf(pred, gold),
    )


def decide_verdict(
    scores: ScoreBundle,
    predicted: AnswerResult,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> VerdictClass:
    """Pure decision rule: abstention or low confidence → not verifiable;
    otherwise token F1 against the support threshold."""
    if predicted.is_empty or predicted.confidence < thresholds.confidence_floor:
        return VerdictClass.NOT_VERIFIABLE
    if scores.tokenPRF.f1 >= thresholds.tau_support:
        return VerdictClass.SUPPORTED
    return VerdictClass.REFUTED


def _roll_up(classes: Sequence[VerdictClass]) -> VerdictClass:
    """Collapse several pair verdicts for one question word: any support
    wins, else any refutation, else not verifiable."""
    if VerdictClass.SUPPORTED in classes:
        return VerdictClass.SUPPORTED
    if VerdictClass.REFUTED in classes:
        return VerdictClass.REFUTED
    return VerdictClass.NOT_VERIFIABLE


def verify_claim(
    record,
    pairs: Sequence[FiveWQAPair],
    backend,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> ClaimVerdictReport:
    """Answer and judge every pair of one claim; every question word gets an
    entry ("no claim" stub when nothing asks about it).

    record needs .id and .evidence. Pairs derived from the claim's
    paraphrases (ids like "<id>#p1") are accepted as belonging to it.
    Per-pair backend failures are collected, not fatal.
    """
    claim_id = record.id
    for pair in pairs:
        if pair.claim_id.split("#", 1)[0] != claim_id:
            raise ValueError(
                f"pair for claim {pair.claim_id!r} passed with record {claim_id!r}"
            )
    evidence = _passage_texts(record)
    verdicts: list[WVerdict] = []
    errors: list[str] = []
    by_w: dict[FiveW, list[VerdictClass]] = {w: [] for w in QUESTION_WS}
    for pair in pairs:
        try:
            predicted = answer_question(pair.question, evidence, backend)
        except BackendError as exc:
            errors.append(f"{pair.w.value}: {exc}")
            continue
        scores = score_answer(predicted, pair.gold_answer)
        verdict = decide_verdict(scores, predicted, thresholds)
        verdicts.append(
            WVerdict(
                w=pair.w,
                question=pair.question,
                gold_answer=pair.gold_answer,
                predicted=predicted,
                scores=scores,
                verdict=verdict,
            )
        )
        if pair.w in by_w:
            by_w[pair.w].append(verdict)
    for w in QUESTION_WS:
        if not by_w[w]:
            verdicts.append(
                WVerdict(
                    w=w,
                    question="",
                    gold_answer="",
                    predicted=AnswerResult("", "", 0.0),
                    scores=ZERO_SCORES,
                    verdict=VerdictClass.NOT_VERIFIABLE,
                    reason=NO_CLAIM_REASON,
                )
            )
    rollup = {w: _roll_up(by_w[w]) for w in QUESTION_WS}
    summary = {cls: 0 for cls in VerdictClass}
    for cls in rollup.values():
        summary[cls] += 1
    return ClaimVerdictReport(
        claim_id=claim_id,
        verdicts=tuple(verdicts),
        rollup=rollup,
        summary=summary,
        errors=tuple(errors),
    )


_SOURCE_BY_MODE = {
    "template": PairSource.TEMPLATE,
    "generative": PairSource.GENERATIVE,
}


def _pairs_for(record, condition: Condition) -> list[FiveWQAPair]:
    pairs = list(record.qa_pairs)
    if condition is Condition.CLAIM_ONLY:
        return [p for p in pairs if p.claim_id == record.id]
    return pairs


def evaluate_grid(
    records: Sequence,
    qag_modes: Sequence[str],
    qa_backends: Mapping[str, object],
    conditions: Sequence[Condition],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[EvalGridCell]:
    """Full cross-product of (pair source, reader, condition) cells; each
    cell is the arithmetic mean of per-pair scores over every record.

    A backend failure inside one cell marks that cell incomplete and moves
    on. Means are order-invariant (plain arithmetic means over the pair
    multiset).
    """
    unknown = [m for m in qag_modes if m not in _SOURCE_BY_MODE]
    if unknown:
        raise ValueError(f"unknown question-generation modes: {unknown}")
    cells: list[EvalGridCell] = []
    for mode in qag_modes:
        source = _SOURCE_BY_MODE[mode]
        for qa_name, backend in qa_backends.items():
            for condition in conditions:
                bleus: list[float] = []
                rouges: list[float] = []
                recalls: list[float] = []
                f1s: list[float] = []
                try:
                    for record in records:
                        evidence = _passage_texts(record)
                        for pair in _pairs_for(record, condition):
                            if pair.source is not source:
                                continue
                            predicted = answer_question(pair.question, evidence, backend)
                            scores = score_answer(predicted, pair.gold_answer)
                            bleus.append(scores.bleu)
                            rouges.append(scores.rougeL.f1)
                            recalls.append(scores.tokenPRF.recall)
                            f1s.append(scores.tokenPRF.f1)
                except BackendError as exc:
                    log.warning(
                        "grid cell (%s, %s, %s) failed: %s",
                        mode,
                        qa_name,
                        condition.value,
                        exc,
                    )
                    cells.append(
                        EvalGridCell(
                            qag_model=mode,
                            qa_model=qa_name,
                            condition=condition,
                            bleu=0.0,
                            rougeL=0.0,
                            recall=0.0,
                            f1=0.0,
                            incomplete=True,
                            error=str(exc),
                        )
                    )
                    continue
                cells.append(
                    EvalGridCell(
                        qag_model=mode,
                        qa_model=qa_name,
                        condition=condition,
                        bleu=fmean(bleus) if bleus else 0.0,
                        rougeL=fmean(rouges) if rouges else 0.0,
                        recall=fmean(recalls) if recalls else 0.0,
                        f1=fmean(f1s) if f1s else 0.0,
                        n_pairs=len(f1s),
                    )
                )
    return cells


# --- serialization -----------------------------------------------------------


def _prf_record(prf: PRF) -> dict:
    return {"precision": prf.precision, "recall": prf.recall, "f1": prf.f1}


def wverdict_to_record(v: WVerdict) -> dict:
    return {
        "w": v.w.value,
        "question": v.question,
        "gold_answer": v.gold_answer,
        "answer": v.predicted.answer_text,
        "confidence": v.predicted.confidence,
        "scores": {
            "bleu": v.scores.bleu,
            "rougeL": _prf_record(v.scores.rougeL),
            "tokenPRF": _prf_record(v.scores.tokenPRF),
        },
        "verdict": v.verdict.value,
        "reason": v.reason,
    }


def report_to_record(report: ClaimVerdictReport) -> dict:
    return {
        "claim_id": report.claim_id,
        "per_w": [wverdict_to_record(v) for v in report.verdicts],
        "rollup": {w.value: cls.value for w, cls in report.rollup.items()},
        "summary": {cls.value: n for cls, n in report.summary.items()},
        "errors": list(report.errors),
    }


def render_reports(reports: Iterable[ClaimVerdictReport]) -> str:
    lines = [json.dumps(report_to_record(r), ensure_ascii=False) for r in reports]
    return "\n".join(lines) + ("\n" if lines else "")


def cell_to_record(cell: EvalGridCell) -> dict:
    return {
        "qag_model": cell.qag_model,
        "qa_model": cell.qa_model,
        "condition": cell.condition.value,
        "bleu": cell.bleu,
        "rougeL": cell.rougeL,
        "recall": cell.recall,
        "f1": cell.f1,
        "n_pairs": cell.n_pairs,
        "incomplete": cell.incomplete,
        "error": cell.error,
    }


def render_grid(cells: Iterable[EvalGridCell]) -> str:
    lines = [json.dumps(cell_to_record(c), ensure_ascii=False) for c in cells]
    return "\n".join(lines) + ("\n" if lines else "")
