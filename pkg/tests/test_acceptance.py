"""Acceptance gate: one test per shipping criterion, each printing a
PASS/FAIL line and enforcing its stated tolerance and runtime budget.

Oracles here are written independently of the library (full-matrix DP for
edit distance, exhaustive subsequence enumeration for LCS) so agreement is
meaningful.
"""

import itertools
import json
import math
import random
import time
from pathlib import Path

import pytest

from fivew.backends import MockNLI, MockParaphrase, NLILabel, ScriptedQA
from fivew.cli import EXIT_OK, main
from fivew.corpus import (
    ClaimRecord,
    EntailmentClass,
    EvidencePassage,
    dedup,
    parse_corpus,
    render_corpus,
    stats,
)
from fivew.demo import (
    EXPECTED_ROLLUP,
    demo_frames,
    demo_pairs,
    demo_qa_backend,
    demo_qa_transcript,
    demo_record,
)
from fivew.paraphrase import (
    CandidateStatus,
    ParaphraseSettings,
    dedup_candidates,
    filter_correctness,
    filter_coverage,
    generate_candidates,
)
from fivew.qagen import FiveWQAPair, PairSource
from fivew.srl5w import DEFAULT_TABLE, FiveW, PropBankRole, map_role, render_frames
from fivew.textmetrics import bleu, med, rouge_l, tokenize
from fivew.verdict import (
    Condition,
    Thresholds,
    VerdictClass,
    evaluate_grid,
    verify_claim,
)


class Budget:
    """Context manager asserting a wall-clock ceiling and printing the line."""

    def __init__(self, name: str, seconds: float | None):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc_type is None:
            budget = f" ({elapsed:.2f}s < {self.seconds:g}s)" if self.seconds else ""
            print(f"[PASS] {self.name}{budget}")
            if self.seconds is not None:
                assert elapsed < self.seconds, f"{self.name}: {elapsed:.2f}s over budget"
        else:
            print(f"[FAIL] {self.name}")
        return False


# --- independent oracles -------------------------------------------------------


def med_oracle(a, b) -> int:
    rows = len(a) + 1
    cols = len(b) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        table[i][0] = i
    for j in range(cols):
        table[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + cost,
            )
    return table[-1][-1]


def lcs_oracle(a, b) -> int:
    """Longest common subsequence by brute enumeration of a's subsequences."""
    best = 0
    for size in range(len(a), best, -1):
        for combo in itertools.combinations(a, size):
            it = iter(b)
            if all(tok in it for tok in combo):
                return size
    return 0


def seq(words: str):
    return tokenize(words)


def test_criterion_1_metric_oracle_equivalence():
    with Budget("metric oracle equivalence", 10.0):
        rng = random.Random(20240817)
        alphabet = "alpha beta gamma delta epsilon zeta".split()

        for _ in range(1000):
            a = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
            b = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
            assert med(a, b) == med_oracle(a, b)

        for _ in range(200):
            a = [rng.choice(alphabet) for _ in range(rng.randint(1, 10))]
            b = [rng.choice(alphabet) for _ in range(rng.randint(1, 10))]
            lcs = lcs_oracle(a, b)
            got = rouge_l(a, b)
            precision = lcs / len(a)
            recall = lcs / len(b)
            f1 = 0.0 if lcs == 0 else 2 * precision * recall / (precision + recall)
            assert got.precision == pytest.approx(precision, abs=1e-12)
            assert got.recall == pytest.approx(recall, abs=1e-12)
            assert got.f1 == pytest.approx(f1, abs=1e-12)

        # hand-computed clipped-precision cases
        assert bleu(seq("the the the"), [seq("the cat")], max_ngram=1) == pytest.approx(
            (1 / 3) * math.exp(1 - 2 / 3), abs=1e-9
        )
        assert bleu(seq("the cat sat"), [seq("the cat sat")]) == pytest.approx(
            1.0, abs=1e-9
        )
        assert bleu(seq("aa bb cc"), [seq("dd ee ff")], max_ngram=1) == pytest.approx(
            0.01, abs=1e-9
        )
        # two unigrams and one bigram hit out of three each, smoothed trigram
        assert bleu(seq("the cat sat"), [seq("the cat naps")]) == pytest.approx(
            (2 / 3 * 1 / 2 * 0.01) ** (1 / 3), abs=1e-9
        )


def test_criterion_2_mapping_fidelity():
    with Budget("role-mapping fidelity", None):
        expected = {
            PropBankRole.ARG0: FiveW.WHO,
            PropBankRole.ARG1: FiveW.WHAT,
            PropBankRole.ARGM_TMP: FiveW.WHEN,
            PropBankRole.ARGM_LOC: FiveW.WHERE,
            PropBankRole.ARGM_CAU: FiveW.WHY,
            PropBankRole.ARGM_MNR: FiveW.HOW,
        }
        assert len(list(PropBankRole)) == 14
        for role in PropBankRole:
            assert map_role(role, DEFAULT_TABLE) == expected.get(role)


def test_criterion_3_paraphrase_pipeline_law():
    with Budget("paraphrase pipeline law", 5.0):
        paraphraser = MockParaphrase()
        nli = MockNLI()
        settings = ParaphraseSettings()

        claims = [
            (f"p{i:03d}", f"The big cat started lawsuits against the company group {i}.")
            for i in range(100)
        ]
        candidates = []
        for claim_id, claim in claims:
            generated = generate_candidates(claim, settings.n, paraphraser, claim_id)
            unique, _ = dedup_candidates(generated)
            candidates.extend(
                filter_correctness(
                    filter_coverage(unique, settings.med_threshold), claim, nli
                )
            )
        assert len(candidates) == 500

        generated_ids = {(c.claim_id, c.index) for c in candidates}
        coverage_pass = {
            (c.claim_id, c.index)
            for c in candidates
            if c.status is not CandidateStatus.DROPPED_COVERAGE
        }
        kept = {
            (c.claim_id, c.index)
            for c in candidates
            if c.status is CandidateStatus.KEPT
        }
        assert kept <= coverage_pass <= generated_ids

        for candidate in candidates:
            if candidate.med_to_claim <= settings.med_threshold:
                assert candidate.status is CandidateStatus.DROPPED_COVERAGE
            elif candidate.nli_label is not NLILabel.ENTAILMENT:
                assert candidate.status is CandidateStatus.DROPPED_CORRECTNESS

        # filters applied again change nothing
        for claim_id, claim in claims:
            batch = [c for c in candidates if c.claim_id == claim_id]
            again = filter_correctness(
                filter_coverage(batch, settings.med_threshold), claim, nli
            )
            assert again == batch


def test_criterion_4_worked_example_end_to_end():
    with Budget("worked-example verdict pattern", 1.0):
        pairs = demo_pairs()
        assert 0 < len(pairs) <= 10
        ws = {p.w for p in pairs}
        assert {FiveW.WHO, FiveW.WHAT, FiveW.WHEN} <= ws
        assert FiveW.WHERE not in ws and FiveW.WHY not in ws

        report = verify_claim(demo_record(), pairs, demo_qa_backend())
        assert report.rollup == EXPECTED_ROLLUP


def test_criterion_5_corpus_laws():
    with Budget("corpus laws", 10.0):
        rng = random.Random(5)
        labels = list(EntailmentClass)
        records = [
            ClaimRecord(
                id=f"r{i:04d}",
                source="other",
                claim=f"Randomized claim {rng.randrange(150)} occurred.",
                label=labels[i % 3],
                evidence=(EvidencePassage(text=f"Passage {i % 40}."),),
            )
            for i in range(200)
        ]
        once, _ = dedup(records)
        twice, dropped_again = dedup(once)
        assert twice == once and dropped_again == 0

        uniques = [
            ClaimRecord(id=f"u{i:04d}", source="other",
                        claim=f"Singular claim {i}.", label=labels[i % 3])
            for i in range(100)
        ]
        duplicates = [
            ClaimRecord(id=f"d{i:04d}", source="other",
                        claim=f"Singular claim {i % 16}.", label=labels[i % 3])
            for i in range(64)
        ]
        _, dropped = dedup(uniques + duplicates)
        assert dropped == 64

        text = render_corpus(once)
        assert render_corpus(parse_corpus(text)) == text

        # three-class row/total structure at 1/10,000 of the full compilation
        scaled = {
            EntailmentClass.SUPPORT: 22,
            EntailmentClass.NEUTRAL: 5,
            EntailmentClass.REFUTE: 9,
        }
        fixture = [
            ClaimRecord(
                id=f"s{cls.value}{i}",
                source="fever",
                claim=f"Structured claim {cls.value} {i}.",
                label=cls,
                evidence=(EvidencePassage(text=f"Doc {cls.value} {i % 7}."),),
            )
            for cls, n in scaled.items()
            for i in range(n)
        ]
        table = stats(fixture)
        assert {cls: table.per_class[cls].claims for cls in scaled} == scaled
        for field in ("claims", "paraphrases", "qa_pairs", "evidence_docs"):
            assert getattr(table.totals, field) == sum(
                getattr(table.per_class[cls], field) for cls in EntailmentClass
            )
        assert table.totals.claims == 36


def _grid_fixture():
    records = []
    script_exact = {}
    script_worse = {}
    for i in range(4):
        cid = f"g{i}"
        pairs = []
        for source in (PairSource.TEMPLATE, PairSource.GENERATIVE):
            for owner in (cid, f"{cid}#p1"):
                question = f"who ruled in case {i} by {source.value} for {owner}?"
                gold = f"the appellate bench {i}"
                pairs.append(
                    FiveWQAPair(
                        claim_id=owner,
                        w=FiveW.WHO,
                        verb_text="ruled",
                        question=question,
                        gold_answer=gold,
                        source=source,
                    )
                )
                script_exact[question] = (gold, 1.0)
                script_worse[question] = (gold + " with several unrelated words", 1.0)
        records.append(
            ClaimRecord(
                id=cid,
                source="other",
                claim=f"Case {i} was decided.",
                label=EntailmentClass.SUPPORT,
                evidence=(EvidencePassage(text=f"Case {i} was decided."),),
                qa_pairs=tuple(pairs),
            )
        )
    return records, ScriptedQA(script_exact), ScriptedQA(script_worse)


def test_criterion_6_grid_behavior():
    with Budget("grid behavior", None):
        records, exact, worse = _grid_fixture()
        cells = evaluate_grid(
            records,
            qag_modes=["template", "generative"],
            qa_backends={"exact": exact, "worse": worse},
            conditions=[Condition.CLAIM_ONLY, Condition.PLUS_PARAPHRASE],
        )
        assert len(cells) == 8
        by_key = {(c.qag_model, c.qa_model, c.condition): c for c in cells}
        for mode in ("template", "generative"):
            for condition in (Condition.CLAIM_ONLY, Condition.PLUS_PARAPHRASE):
                exact_cell = by_key[(mode, "exact", condition)]
                worse_cell = by_key[(mode, "worse", condition)]
                assert exact_cell.n_pairs > 0
                assert exact_cell.f1 == pytest.approx(1.0)
                assert exact_cell.bleu == pytest.approx(1.0)
                assert worse_cell.f1 < exact_cell.f1


def test_criterion_7_threshold_monotonicity():
    with Budget("threshold monotonicity", None):
        records = []
        script = {}
        gold = "the regional water board"
        answers = [
            "the regional water board",              # f1 = 1.0
            "the regional water board voted today",  # f1 = 8/11
            "a regional board",                      # f1 ≈ 0.57
            "the final vote",                        # f1 = 2/7
            "something else entirely",               # f1 = 0
        ]
        for i in range(50):
            cid = f"m{i:02d}"
            question = f"who approved permit {i}?"
            records.append(
                ClaimRecord(
                    id=cid,
                    source="other",
                    claim=f"Permit {i} was approved.",
                    label=EntailmentClass.SUPPORT,
                    evidence=(EvidencePassage(text=f"Permit {i} was approved."),),
                    qa_pairs=(
                        FiveWQAPair(
                            claim_id=cid,
                            w=FiveW.WHO,
                            verb_text="approved",
                            question=question,
                            gold_answer=gold,
                            source=PairSource.TEMPLATE,
                        ),
                    ),
                )
            )
            script[question] = (answers[i % 5], 0.9)
        backend = ScriptedQA(script)

        counts = []
        for tau in (0.1, 0.3, 0.5, 0.7, 0.9):
            thresholds = Thresholds(tau_support=tau)
            supported = 0
            for record in records:
                report = verify_claim(
                    record, list(record.qa_pairs), backend, thresholds
                )
                supported += sum(
                    1
                    for cls in report.rollup.values()
                    if cls is VerdictClass.SUPPORTED
                )
            counts.append(supported)
        assert counts == sorted(counts, reverse=True)
        assert counts[0] > counts[-1]


def test_criterion_8_cli_determinism(tmp_path):
    with Budget("CLI determinism", None):
        source = tmp_path / "source.jsonl"
        rows = [
            {
                "id": "demo-0001",
                "claim": demo_record().claim,
                "label": "refute",
                "evidence": [p.text for p in demo_record().evidence],
            }
        ] + [
            {
                "id": f"c{i:03d}",
                "claim": f"Deterministic claim {i} stands.",
                "label": ["support", "neutral", "refute"][i % 3],
                "evidence": [f"Deterministic claim {i} stands firmly."],
            }
            for i in range(30)
        ]
        source.write_text(
            "\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8"
        )
        frames = tmp_path / "frames.jsonl"
        frames.write_text(render_frames(demo_frames()), encoding="utf-8")
        qa_script = tmp_path / "qa.json"
        qa_script.write_text(
            json.dumps({q: list(v) for q, v in demo_qa_transcript().items()}),
            encoding="utf-8",
        )

        corpus = tmp_path / "corpus.jsonl"
        withqa = tmp_path / "withqa.jsonl"
        commands = [
            ["build-corpus", "--in", str(source), "--adapter", "other",
             "--out", str(corpus), "--split", "0.8,0.1,0.1", "--seed", "7"],
            ["qagen", "--corpus", str(corpus), "--frames", str(frames),
             "--mode", "template", "--out", str(withqa)],
            ["paraphrase-eval", "--corpus", str(corpus), "--models", "mock",
             "--report", str(tmp_path / "para.jsonl")],
            ["validate", "--corpus", str(withqa),
             "--qa-backend", f"scripted:{qa_script}",
             "--report", str(tmp_path / "verdicts.jsonl"),
             "--thresholds", "tau_support=0.3", "--thresholds", "tau_support=0.7"],
            ["eval-grid", "--corpus", str(withqa), "--qag", "template",
             "--qa", f"scripted:{qa_script},mock",
             "--conditions", "claim,plus-paraphrase",
             "--report", str(tmp_path / "grid.jsonl")],
        ]
        inputs = {source.name, frames.name, qa_script.name}

        def run_all() -> dict[str, bytes]:
            for argv in commands:
                assert main(argv) == EXIT_OK, argv
            return {
                p.name: p.read_bytes()
                for p in sorted(tmp_path.iterdir())
                if p.name not in inputs
            }

        first = run_all()
        second = run_all()
        assert set(first) == set(second)
        for name in first:
            assert first[name] == second[name], f"{name} differs between runs"
        # every stage actually produced its outputs
        assert {"corpus.jsonl", "corpus.train.jsonl", "withqa.jsonl",
                "para.jsonl", "verdicts.jsonl", "verdicts.sweep.tsv",
                "grid.jsonl", "grid.png"} <= set(first)
