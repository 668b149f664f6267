"""A small, fully worked vaccine-lawsuit example used across tests and docs.

One claim, two predicate frames over its tokens, two evidence passages, and
a scripted reader transcript whose hand-checked token-F1 values land on a
known verdict pattern: the Who question is supported, the What and When
questions are refuted, and nothing asks Where or Why.
"""

from __future__ import annotations

from .backends import ScriptedQA
from .corpus import ClaimRecord, EntailmentClass, EvidencePassage
from .qagen import FiveWQAPair, generate_qapairs
from .srl5w import FiveW, PropBankRole, RoleSpan, SRLFrame
from .textmetrics import TokenSeq
from .verdict import VerdictClass

DEMO_CLAIM_ID = "demo-0001"

DEMO_TOKENS = (
    "Moderna's",
    "lawsuits",
    "against",
    "Pfizer-BioNTech",
    "show",
    "COVID-19",
    "vaccines",
    "were",
    "in",
    "the",
    "works",
    "before",
    "the",
    "pandemic",
    "started",
    ".",
)

DEMO_CLAIM = " ".join(DEMO_TOKENS[:-1]) + "."

EVIDENCE_1 = (
    "Moderna is suing Pfizer and BioNTech for patent infringement, alleging "
    "the rival companies copied technology that Moderna developed years "
    "before the pandemic."
)

EVIDENCE_2 = (
    "Although the patents existed before the pandemic began, this does not "
    "mean Moderna or Pfizer-BioNTech were already working on the COVID-19 "
    "vaccine. The patents cover technology used in the vaccines."
)

_E2_FIRST_SENTENCE = EVIDENCE_2.split(". ")[0] + "."


def _span(role: PropBankRole, start: int, end: int) -> RoleSpan:
    return RoleSpan(
        role=role, start=start, end=end, text=" ".join(DEMO_TOKENS[start:end])
    )


def demo_frames() -> list[SRLFrame]:
    tokens = TokenSeq(DEMO_TOKENS)
    return [
        SRLFrame(
            claim_id=DEMO_CLAIM_ID,
            sentence_tokens=tokens,
            verb_index=4,
            verb_text="show",
            spans=(
                _span(PropBankRole.ARG0, 0, 4),
                _span(PropBankRole.ARG1, 5, 15),
            ),
        ),
        SRLFrame(
            claim_id=DEMO_CLAIM_ID,
            sentence_tokens=tokens,
            verb_index=7,
            verb_text="were",
            spans=(
                _span(PropBankRole.ARG1, 5, 7),
                _span(PropBankRole.ARGM_TMP, 11, 14),
            ),
        ),
    ]


def demo_record() -> ClaimRecord:
    return ClaimRecord(
        id=DEMO_CLAIM_ID,
        source="other",
        claim=DEMO_CLAIM,
        label=EntailmentClass.REFUTE,
        evidence=(
            EvidencePassage(text=EVIDENCE_1),
            EvidencePassage(text=EVIDENCE_2),
        ),
    )


def demo_pairs() -> list[FiveWQAPair]:
    return list(generate_qapairs(demo_record(), demo_frames()))


def demo_qa_transcript() -> dict[str, tuple[str, float]]:
    """question -> (answer, reader confidence); answers are evidence spans."""
    return {
        (
            "Who show COVID-19 vaccines were in the works before the "
            "pandemic started?"
        ): ("Moderna lawsuits against Pfizer-BioNTech", 0.9),
        "Moderna's lawsuits against Pfizer-BioNTech show what?": (
            _E2_FIRST_SENTENCE,
            0.85,
        ),
        (
            "Moderna's lawsuits against Pfizer-BioNTech show what were in "
            "the works before the pandemic started?"
        ): (_E2_FIRST_SENTENCE, 0.85),
        (
            "Moderna's lawsuits against Pfizer-BioNTech show COVID-19 "
            "vaccines were in the works when started?"
        ): (_E2_FIRST_SENTENCE, 0.8),
    }


def demo_qa_backend() -> ScriptedQA:
    return ScriptedQA(demo_qa_transcript())


EXPECTED_ROLLUP = {
    FiveW.WHO: VerdictClass.SUPPORTED,
    FiveW.WHAT: VerdictClass.REFUTED,
    FiveW.WHEN: VerdictClass.REFUTED,
    FiveW.WHERE: VerdictClass.NOT_VERIFIABLE,
    FiveW.WHY: VerdictClass.NOT_VERIFIABLE,
}
