"""Tests for template and backend-driven question-answer pair generation."""

from dataclasses import dataclass

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fivew.backends import MockQG, TransportError
from fivew.qagen import (
    FiveWQAPair,
    PairSource,
    QAGenMode,
    gen_question_backend,
    gen_question_template,
    generate_qapairs,
    pair_from_record,
    pair_to_record,
    render_pairs,
)
from fivew.srl5w import FiveW, PropBankRole, RoleSpan, SRLFrame, extract_5w
from fivew.textmetrics import CASEFOLD, STRIP_PUNCT, TokenSeq, tokenize

from test_srl5w import MODERNA_TOKENS, make_frame


@dataclass
class Record:
    id: str
    claim: str


MODERNA_CLAIM = (
    "Moderna's lawsuits against Pfizer-BioNTech show COVID-19 vaccines were "
    "in the works before the pandemic started ."
)

SHOW_FRAME = make_frame("c1", MODERNA_TOKENS, 4, [("ARG0", 0, 4), ("ARG1", 5, 15)])
WERE_FRAME = make_frame("c1", MODERNA_TOKENS, 7, [("ARGM-TMP", 11, 14)])


class ScriptedQG:
    def __init__(self, mapping):
        self._mapping = mapping

    def qg(self, claim, w, answer_span):
        return self._mapping[(w, answer_span)]


class DeadQG:
    def qg(self, claim, w, answer_span):
        raise TransportError("no backend")


# --- template engine -------------------------------------------------------


def test_template_what_question_matches_expected_form():
    span = extract_5w(SHOW_FRAME)[FiveW.WHAT]
    pair = gen_question_template(SHOW_FRAME, FiveW.WHAT, span)
    assert pair.question == "Moderna's lawsuits against Pfizer-BioNTech show what?"
    assert pair.gold_answer == (
        "COVID-19 vaccines were in the works before the pandemic started"
    )
    assert pair.source is PairSource.TEMPLATE
    assert pair.verb_text == "show"


def test_template_when_question_and_gold():
    span = extract_5w(WERE_FRAME)[FiveW.WHEN]
    pair = gen_question_template(WERE_FRAME, FiveW.WHEN, span)
    assert pair.gold_answer == "before the pandemic"
    assert pair.question == (
        "Moderna's lawsuits against Pfizer-BioNTech show COVID-19 vaccines "
        "were in the works when started?"
    )


def test_template_sentence_initial_span_capitalizes_w():
    frame = make_frame(
        "c2", ["Manning", "leaked", "documents", "."], 1, [("ARG0", 0, 1)]
    )
    span = extract_5w(frame)[FiveW.WHO]
    pair = gen_question_template(frame, FiveW.WHO, span)
    assert pair.question == "Who leaked documents?"
    assert pair.gold_answer == "Manning"


def test_template_attached_terminal_punctuation():
    frame = make_frame("c3", ["Alice", "visited", "Bob."], 1, [("ARG1", 2, 3)])
    span = extract_5w(frame)[FiveW.WHAT]
    pair = gen_question_template(frame, FiveW.WHAT, span)
    assert pair.question == "Alice visited what?"


def test_template_determinism():
    span = extract_5w(SHOW_FRAME)[FiveW.WHO]
    a = gen_question_template(SHOW_FRAME, FiveW.WHO, span)
    b = gen_question_template(SHOW_FRAME, FiveW.WHO, span)
    assert a == b


def test_template_questions_differ_per_w():
    pairs = {
        w: gen_question_template(SHOW_FRAME, w, span)
        for w, span in extract_5w(SHOW_FRAME).items()
    }
    questions = [p.question for p in pairs.values()]
    assert len(set(questions)) == len(questions)


# --- backend engine -----------------------------------------------------------


def test_backend_engine_keeps_gold_answer():
    span = extract_5w(SHOW_FRAME)[FiveW.WHAT]
    backend = ScriptedQG({(FiveW.WHAT, span.text): "What the lawsuit shows?"})
    pair = gen_question_backend(MODERNA_CLAIM, FiveW.WHAT, span, backend, frame=SHOW_FRAME)
    assert pair.question == "What the lawsuit shows?"
    assert pair.gold_answer == span.text
    assert pair.source is PairSource.GENERATIVE


def test_backend_engine_appends_question_mark():
    span = extract_5w(SHOW_FRAME)[FiveW.WHO]
    backend = ScriptedQG({(FiveW.WHO, span.text): "Who sued Pfizer"})
    pair = gen_question_backend(MODERNA_CLAIM, FiveW.WHO, span, backend, frame=SHOW_FRAME)
    assert pair.question == "Who sued Pfizer?"


def test_backend_failure_falls_back_to_template(caplog):
    span = extract_5w(SHOW_FRAME)[FiveW.WHAT]
    pair = gen_question_backend(
        MODERNA_CLAIM, FiveW.WHAT, span, DeadQG(), frame=SHOW_FRAME
    )
    assert pair.source is PairSource.TEMPLATE
    assert pair.question.endswith("show what?")


def test_backend_failure_strict_mode_raises():
    span = extract_5w(SHOW_FRAME)[FiveW.WHAT]
    with pytest.raises(TransportError):
        gen_question_backend(
            MODERNA_CLAIM, FiveW.WHAT, span, DeadQG(), frame=SHOW_FRAME, strict=True
        )


def test_backend_mock_echoes_template_form():
    # The rule QG mock mirrors the template, so on a span whose text appears
    # verbatim in the claim the two engines agree on the question text.
    frame = make_frame("c3", ["Alice", "visited", "Bob", "."], 1, [("ARG0", 0, 1)])
    span = extract_5w(frame)[FiveW.WHO]
    template = gen_question_template(frame, FiveW.WHO, span)
    generative = gen_question_backend(
        "Alice visited Bob .", FiveW.WHO, span, MockQG(), frame=frame
    )
    assert generative.question == template.question


# --- generate_qapairs ------------------------------------------------------------


def test_two_verb_claim_at_most_ten_pairs_where_why_absent():
    record = Record(id="c1", claim=MODERNA_CLAIM)
    pairs = generate_qapairs(record, [SHOW_FRAME, WERE_FRAME])
    assert len(pairs) <= 10
    ws = {p.w for p in pairs}
    assert FiveW.WHERE not in ws
    assert FiveW.WHY not in ws
    assert {FiveW.WHO, FiveW.WHAT, FiveW.WHEN} <= ws


def test_claim_with_no_mapped_roles_yields_nothing():
    record = Record(id="c4", claim="It may rain")
    frame = make_frame("c4", ["It", "may", "rain"], 2, [("ARGM-MOD", 1, 2)])
    assert generate_qapairs(record, [frame]) == []


def test_one_verb_who_what_when_yields_three():
    record = Record(id="c5", claim="Alice visited Bob yesterday")
    frame = make_frame(
        "c5",
        ["Alice", "visited", "Bob", "yesterday"],
        1,
        [("ARG0", 0, 1), ("ARG1", 2, 3), ("ARGM-TMP", 3, 4)],
    )
    pairs = generate_qapairs(record, [frame])
    assert len(pairs) == 3
    assert [p.w for p in pairs] == [FiveW.WHO, FiveW.WHAT, FiveW.WHEN]


def test_how_excluded_by_default_included_on_flag():
    record = Record(id="c6", claim="He fixed it with glue")
    frame = make_frame(
        "c6", ["He", "fixed", "it", "with", "glue"], 1, [("ARGM-MNR", 3, 5)]
    )
    assert generate_qapairs(record, [frame]) == []
    pairs = generate_qapairs(record, [frame], include_how=True)
    assert [p.w for p in pairs] == [FiveW.HOW]


def test_frame_claim_mismatch_rejected():
    record = Record(id="other", claim="x")
    with pytest.raises(ValueError, match="frame for claim"):
        generate_qapairs(record, [SHOW_FRAME])


def test_generative_mode_requires_backend():
    record = Record(id="c1", claim=MODERNA_CLAIM)
    with pytest.raises(ValueError, match="requires a question-generation backend"):
        generate_qapairs(record, [SHOW_FRAME], mode=QAGenMode.GENERATIVE)


def test_generative_mode_sets_source():
    record = Record(id="c1", claim=MODERNA_CLAIM)
    pairs = generate_qapairs(
        record, [SHOW_FRAME], mode=QAGenMode.GENERATIVE, backend=MockQG()
    )
    assert pairs and all(p.source is PairSource.GENERATIVE for p in pairs)


def test_pair_count_bounded_by_five_per_verb():
    record = Record(id="c1", claim=MODERNA_CLAIM)
    pairs = generate_qapairs(record, [SHOW_FRAME, WERE_FRAME])
    assert len(pairs) <= 5 * 2


# --- invariants -------------------------------------------------------------------


def test_gold_answer_relocates_in_claim():
    record = Record(id="c1", claim=MODERNA_CLAIM)
    claim_tokens = list(tokenize(MODERNA_CLAIM, {CASEFOLD, STRIP_PUNCT}))
    for pair in generate_qapairs(record, [SHOW_FRAME, WERE_FRAME]):
        gold_tokens = list(tokenize(pair.gold_answer, {CASEFOLD, STRIP_PUNCT}))
        n = len(gold_tokens)
        assert any(
            claim_tokens[i : i + n] == gold_tokens
            for i in range(len(claim_tokens) - n + 1)
        )


def test_pair_invariant_question_mark_required():
    with pytest.raises(ValueError):
        FiveWQAPair("c1", FiveW.WHO, "v", "Who did it", "x", PairSource.TEMPLATE)


def test_pair_invariant_template_contains_w_word():
    with pytest.raises(ValueError):
        FiveWQAPair("c1", FiveW.WHO, "v", "Did it rain?", "x", PairSource.TEMPLATE)


@given(st.integers(min_value=0, max_value=3), st.integers(min_value=4, max_value=7))
def test_template_gold_is_verbatim_span(start, end):
    tokens = ["t0", "t1", "t2", "t3", "t4", "t5", "t6", "ran"]
    frame = make_frame("c", tokens, 7, [("ARG1", start, end)])
    span = extract_5w(frame)[FiveW.WHAT]
    pair = gen_question_template(frame, FiveW.WHAT, span)
    assert pair.gold_answer == " ".join(tokens[start:end])
    assert pair.question.endswith("?")


# --- serialization -------------------------------------------------------------------


def test_pair_record_round_trip():
    span = extract_5w(SHOW_FRAME)[FiveW.WHO]
    pair = gen_question_template(SHOW_FRAME, FiveW.WHO, span)
    assert pair_from_record(pair_to_record(pair)) == pair


def test_render_pairs_is_newline_delimited():
    record = Record(id="c1", claim=MODERNA_CLAIM)
    pairs = generate_qapairs(record, [SHOW_FRAME])
    text = render_pairs(pairs)
    assert text.count("\n") == len(pairs)
    assert render_pairs([]) == ""
