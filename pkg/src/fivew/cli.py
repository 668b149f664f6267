"""Pipeline stages as subcommands: corpus building, paraphrase model
comparison, question generation, claim validation, and the generator×reader
grid.

Reports are machine-readable row files; a human-readable table goes to
stdout (percentages ×100 only there). Each report is accompanied by
two-column series files and rendered PNG figures with derived sibling
names. Identical inputs and seed produce byte-identical outputs, and no
subcommand writes over its inputs.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import figures, paraphrase, verdict
from .backends import BackendError, BackendRole
from .config import ConfigError, RunConfig, backend_from_spec, resolve_config
from .corpus import (
    ClaimRecord,
    CorpusStats,
    EntailmentClass,
    SPLIT_NAMES,
    dedup,
    parse_corpus,
    parse_source,
    render_corpus,
    split,
    stats,
)
from .qagen import QAGenMode, generate_qapairs
from .srl5w import FrameParseError, QUESTION_WS, SRLFrame, parse_frames, w_presence
from .verdict import Condition, Thresholds

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad flags, unreadable inputs, unknown descriptors: exit code 2."""


# --- small shared helpers ------------------------------------------------------


def _default_jobs() -> int:
    return os.cpu_count() or 1


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("-") or "model"


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc}") from exc


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_corpus(path: str) -> list[ClaimRecord]:
    text = _read_text(path, "corpus")
    try:
        return parse_corpus(text)
    except ValueError as exc:
        raise UsageError(f"corpus {path}: {exc}") from exc


def _load_frames(path: str) -> list[SRLFrame]:
    text = _read_text(path, "frames")
    try:
        return parse_frames(text)
    except FrameParseError as exc:
        raise UsageError(f"frames {path}: {exc}") from exc


def _guard_output(out: str, inputs: Sequence[str]) -> Path:
    out_path = Path(out)
    for source in inputs:
        if source and out_path.resolve() == Path(source).resolve():
            raise UsageError(f"output {out} would overwrite input {source}")
    return out_path


def _series(path: Path, header: tuple[str, str], rows) -> None:
    lines = [f"# {header[0]}\t{header[1]}"]
    lines.extend(f"{x}\t{y}" for x, y in rows)
    _write_text(path, "\n".join(lines) + "\n")


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(row):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    ruler = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(header), ruler] + [fmt(r) for r in rows])


def _pct(value: float) -> str:
    return f"{100.0 * value:.2f}"


def _config_from(args) -> RunConfig:
    try:
        return resolve_config(getattr(args, "config", None))
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc


def _backend(role: BackendRole, spec: str):
    try:
        return backend_from_spec(role, spec)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc


def _csv(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


# --- build-corpus ----------------------------------------------------------------


def cmd_build_corpus(args) -> int:
    config = _config_from(args)
    inputs: list[str] = args.inputs
    adapters: list[str] = args.adapter
    if len(adapters) == 1 and len(inputs) > 1:
        adapters = adapters * len(inputs)
    if len(adapters) != len(inputs):
        raise UsageError(
            f"{len(inputs)} inputs but {len(adapters)} adapters; "
            "give one --adapter per --in, or a single one for all"
        )
    out_path = _guard_output(args.out, inputs)

    records: list[ClaimRecord] = []
    diagnostics: list[str] = []
    for path, adapter in zip(inputs, adapters):
        text = _read_text(path, "input")
        try:
            parsed, problems = parse_source(text, adapter)
        except ValueError as exc:
            raise UsageError(f"{path}: {exc}") from exc
        diagnostics.extend(f"{path}: {problem}" for problem in problems)
        records.extend(parsed)
    if diagnostics:
        for line in diagnostics:
            print(f"error: {line}", file=sys.stderr)
        raise UsageError(f"{len(diagnostics)} malformed input record(s)")

    deduped, dropped = dedup(records)

    parts = None
    if args.split:
        fractions = args.split.split(",")
        try:
            fractions = [float(f) for f in fractions]
            parts = split(deduped, fractions, seed=args.seed if args.seed is not None else config.seed)
        except ValueError as exc:
            raise UsageError(f"bad --split: {exc}") from exc

    _write_text(out_path, render_corpus(deduped))
    if parts is not None:
        for name in SPLIT_NAMES:
            _write_text(_sibling(out_path, f".{name}.jsonl"), render_corpus(parts[name]))

    corpus_stats = stats(deduped)
    _write_text(
        _sibling(out_path, ".stats.json"),
        json.dumps(_stats_record(corpus_stats, dropped), indent=2, ensure_ascii=False) + "\n",
    )
    _series(
        _sibling(out_path, ".stats.tsv"),
        ("class", "claims"),
        [(cls.value, corpus_stats.per_class[cls].claims) for cls in EntailmentClass],
    )
    figures.save_figure(figures.stats_figure(corpus_stats), _sibling(out_path, ".stats.png"))

    print(_stats_table(corpus_stats))
    print(f"\nrecords kept: {len(deduped)}  duplicates dropped: {dropped}")
    if parts is not None:
        sizes = "  ".join(f"{name}: {len(parts[name])}" for name in SPLIT_NAMES)
        print(f"split sizes: {sizes}")
    return EXIT_OK


def _stats_record(corpus_stats: CorpusStats, dropped: int) -> dict:
    return {
        "per_class": {
            cls.value: dataclasses.asdict(corpus_stats.per_class[cls])
            for cls in EntailmentClass
        },
        "per_source": dict(corpus_stats.per_source),
        "totals": dataclasses.asdict(corpus_stats.totals),
        "duplicates_dropped": dropped,
    }


def _stats_table(corpus_stats: CorpusStats) -> str:
    header = ["class", "claims", "paraphrases", "qa_pairs", "evidence_docs"]
    rows = []
    for cls in EntailmentClass:
        cell = corpus_stats.per_class[cls]
        rows.append(
            [cls.value, str(cell.claims), str(cell.paraphrases), str(cell.qa_pairs), str(cell.evidence_docs)]
        )
    totals = corpus_stats.totals
    rows.append(
        ["total", str(totals.claims), str(totals.paraphrases), str(totals.qa_pairs), str(totals.evidence_docs)]
    )
    lines = [_table(header, rows)]
    if corpus_stats.per_source:
        sources = "  ".join(f"{k}: {v}" for k, v in corpus_stats.per_source.items())
        lines.append(f"sources: {sources}")
    return "\n".join(lines)


# --- paraphrase-eval ------------------------------------------------------------


def cmd_paraphrase_eval(args) -> int:
    config = _config_from(args)
    records = _load_corpus(args.corpus)
    report_path = _guard_output(args.report, [args.corpus])
    model_ids = _csv(args.models)
    if not model_ids:
        raise UsageError("--models needs at least one model descriptor")
    backends = {mid: _backend(BackendRole.PARAPHRASE, mid) for mid in model_ids}
    nli = _backend(BackendRole.NLI, config.backend_spec(BackendRole.NLI))
    settings = config.paraphrase_settings(jobs=args.jobs)

    claims = [(r.id, r.claim) for r in records]
    reports = paraphrase.compare_models(claims, model_ids, backends, nli, settings)

    _write_text(
        report_path,
        "\n".join(json.dumps(paraphrase.report_to_record(r), ensure_ascii=False) for r in reports)
        + ("\n" if reports else ""),
    )
    for report in reports:
        _series(
            _sibling(report_path, f".{_safe_name(report.model_id)}.tsv"),
            ("index", "diversity"),
            report.per_index_diversity,
        )
    figures.save_figure(figures.diversity_figure(reports), _sibling(report_path, ".png"))

    header = ["model", "coverage", "pass%", "correct%", "diversity", "note"]
    rows = []
    for r in reports:
        rows.append(
            [
                r.model_id,
                f"{r.coverage_mean_kept:.2f}",
                _pct(r.coverage_pass_fraction),
                _pct(r.correctness_fraction),
                f"{r.diversity_mean:.2f}",
                "incomplete" if r.incomplete else "",
            ]
        )
    print(_table(header, rows))
    print(f"\nclaims evaluated: {len(claims)}")
    return EXIT_OK


# --- qagen -----------------------------------------------------------------------


def cmd_qagen(args) -> int:
    config = _config_from(args)
    records = _load_corpus(args.corpus)
    frames = _load_frames(args.frames)
    out_path = _guard_output(args.out, [args.corpus, args.frames])

    mode = QAGenMode(args.mode)
    backend = None
    if mode is QAGenMode.GENERATIVE:
        spec = config.backends.get(BackendRole.QG.value, "")
        if spec:
            backend = _backend(BackendRole.QG, spec)
        elif args.strict:
            raise UsageError("generative mode needs a qg backend in the config")
        else:
            log.warning("no qg backend configured; falling back to templates")
            mode = QAGenMode.TEMPLATE

    frames_by_claim: dict[str, list[SRLFrame]] = {}
    for frame in frames:
        frames_by_claim.setdefault(frame.claim_id, []).append(frame)

    out_records: list[ClaimRecord] = []
    generated = 0
    for record in records:
        claim_frames = frames_by_claim.get(record.id, [])
        if not claim_frames:
            out_records.append(record)
            continue
        pairs = generate_qapairs(
            record,
            claim_frames,
            mode=mode,
            backend=backend,
            strict=args.strict,
        )
        generated += len(pairs)
        out_records.append(dataclasses.replace(record, qa_pairs=tuple(pairs)))

    _write_text(out_path, render_corpus(out_records))

    covered = [frames_by_claim.get(r.id, []) for r in records]
    presence = w_presence(covered)
    fractions = {w: presence.fractions[w] for w in QUESTION_WS}
    _series(
        _sibling(out_path, ".presence.tsv"),
        ("w", "fraction"),
        [(w.value, f"{frac:.6f}") for w, frac in fractions.items()],
    )
    figures.save_figure(figures.presence_figure(fractions), _sibling(out_path, ".presence.png"))

    header = ["w", "claims with span", "fraction%"]
    rows = [
        [w.value, str(presence.counts[w]), _pct(frac)] for w, frac in fractions.items()
    ]
    print(_table(header, rows))
    print(
        f"\nclaims: {len(records)}  frames: {len(frames)}  "
        f"pairs generated: {generated}"
    )
    return EXIT_OK


# --- validate --------------------------------------------------------------------


def _parse_threshold_spec(spec: str, base: Thresholds) -> Thresholds:
    values = {"tau_support": base.tau_support, "confidence_floor": base.confidence_floor}
    for part in _csv(spec):
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep or key not in values:
            raise UsageError(
                f"bad --thresholds entry {part!r}; expected "
                "tau_support=<x> and/or confidence_floor=<x>"
            )
        try:
            values[key] = float(value)
        except ValueError as exc:
            raise UsageError(f"bad --thresholds value {part!r}") from exc
    try:
        return Thresholds(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_validate(args) -> int:
    config = _config_from(args)
    records = _load_corpus(args.corpus)
    report_path = _guard_output(args.report, [args.corpus])
    backend = _backend(BackendRole.QA, args.qa_backend)

    base = config.verdict_thresholds()
    settings = [_parse_threshold_spec(s, base) for s in (args.thresholds or [])]
    if not settings:
        settings = [base]

    lines: list[str] = []
    summaries: list[tuple[Thresholds, dict]] = []
    last_reports: list[verdict.ClaimVerdictReport] = []
    for thresholds in settings:
        def check(record: ClaimRecord) -> verdict.ClaimVerdictReport:
            return verdict.verify_claim(record, list(record.qa_pairs), backend, thresholds)

        if args.jobs > 1 and len(records) > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                reports = list(pool.map(check, records))
        else:
            reports = [check(record) for record in records]
        counts = {cls.value: 0 for cls in verdict.VerdictClass}
        for report in reports:
            for cls in report.rollup.values():
                counts[cls.value] += 1
        summaries.append((thresholds, counts))
        last_reports = reports
        for report in reports:
            row = {
                "thresholds": {
                    "tau_support": thresholds.tau_support,
                    "confidence_floor": thresholds.confidence_floor,
                },
            }
            row.update(verdict.report_to_record(report))
            lines.append(json.dumps(row, ensure_ascii=False))

    _write_text(report_path, "\n".join(lines) + ("\n" if lines else ""))

    if len(settings) > 1:
        points = [
            (thresholds.tau_support, counts["supported"])
            for thresholds, counts in summaries
        ]
        _series(
            _sibling(report_path, ".sweep.tsv"),
            ("tau_support", "supported"),
            points,
        )
        figures.save_figure(
            figures.sweep_figure(sorted(points)), _sibling(report_path, ".png")
        )
    else:
        by_w = {
            w: sum(
                1
                for report in last_reports
                if report.rollup[w] is verdict.VerdictClass.SUPPORTED
            )
            for w in QUESTION_WS
        }
        _series(
            _sibling(report_path, ".byw.tsv"),
            ("w", "supported"),
            [(w.value, n) for w, n in by_w.items()],
        )
        figures.save_figure(
            figures.verdict_figure(last_reports), _sibling(report_path, ".png")
        )

    header = ["tau_support", "confidence_floor", "supported", "refuted", "not_verifiable"]
    rows = [
        [
            f"{thresholds.tau_support:g}",
            f"{thresholds.confidence_floor:g}",
            str(counts["supported"]),
            str(counts["refuted"]),
            str(counts["not_verifiable"]),
        ]
        for thresholds, counts in summaries
    ]
    print(_table(header, rows))
    print(f"\nclaims validated: {len(records)} (counts are per question word)")
    return EXIT_OK


# --- eval-grid -------------------------------------------------------------------


def cmd_eval_grid(args) -> int:
    config = _config_from(args)
    records = _load_corpus(args.corpus)
    report_path = _guard_output(args.report, [args.corpus])

    modes = _csv(args.qag)
    if not modes:
        raise UsageError("--qag needs at least one mode")
    qa_specs = _csv(args.qa)
    if not qa_specs:
        raise UsageError("--qa needs at least one backend descriptor")
    qa_backends = {spec: _backend(BackendRole.QA, spec) for spec in qa_specs}
    conditions = []
    for name in _csv(args.conditions):
        try:
            conditions.append(Condition(name))
        except ValueError as exc:
            raise UsageError(f"unknown condition {name!r}") from exc
    if not conditions:
        raise UsageError("--conditions needs at least one condition")

    try:
        cells = verdict.evaluate_grid(
            records, modes, qa_backends, conditions, config.verdict_thresholds()
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    _write_text(report_path, verdict.render_grid(cells))
    _series(
        _sibling(report_path, ".f1.tsv"),
        ("cell", "f1"),
        [
            (f"{c.qag_model}|{c.qa_model}|{c.condition.value}", f"{c.f1:.6f}")
            for c in cells
        ],
    )
    figures.save_figure(figures.grid_figure(cells), _sibling(report_path, ".png"))

    header = ["qag", "qa", "condition", "bleu", "rougeL", "recall", "f1", "pairs", "note"]
    rows = [
        [
            c.qag_model,
            c.qa_model,
            c.condition.value,
            _pct(c.bleu),
            _pct(c.rougeL),
            _pct(c.recall),
            _pct(c.f1),
            str(c.n_pairs),
            "incomplete" if c.incomplete else "",
        ]
        for c in cells
    ]
    print(_table(header, rows))
    return EXIT_OK


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fivew",
        description="Aspect-based claim verification pipeline.",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log at INFO level"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub, config_flag: bool = True):
        if config_flag:
            sub.add_argument("--config", help="config file (default: $FIVEW_CONFIG)")
        sub.add_argument(
            "--jobs",
            type=int,
            default=_default_jobs(),
            help="parallel workers (default: logical cores)",
        )

    sub = commands.add_parser("build-corpus", help="merge, dedup, split, report stats")
    sub.add_argument("--in", dest="inputs", action="append", required=True, metavar="PATH")
    sub.add_argument("--adapter", action="append", required=True, metavar="TAG")
    sub.add_argument("--out", required=True, metavar="PATH")
    sub.add_argument("--split", metavar="A,B,C", help="train,dev,test fractions")
    sub.add_argument("--seed", type=int, default=None)
    add_common(sub)
    sub.set_defaults(handler=cmd_build_corpus)

    sub = commands.add_parser("paraphrase-eval", help="compare paraphrase models")
    sub.add_argument("--corpus", required=True, metavar="PATH")
    sub.add_argument("--models", required=True, metavar="IDS")
    sub.add_argument("--report", required=True, metavar="PATH")
    add_common(sub)
    sub.set_defaults(handler=cmd_paraphrase_eval)

    sub = commands.add_parser("qagen", help="generate question-answer pairs")
    sub.add_argument("--corpus", required=True, metavar="PATH")
    sub.add_argument("--frames", required=True, metavar="PATH")
    sub.add_argument("--mode", choices=["template", "generative"], default="template")
    sub.add_argument("--out", required=True, metavar="PATH")
    sub.add_argument("--strict", action="store_true", help="fail instead of falling back")
    add_common(sub)
    sub.set_defaults(handler=cmd_qagen)

    sub = commands.add_parser("validate", help="verdict per claim and question word")
    sub.add_argument("--corpus", required=True, metavar="PATH")
    sub.add_argument("--qa-backend", required=True, metavar="DESC")
    sub.add_argument("--report", required=True, metavar="PATH")
    sub.add_argument(
        "--thresholds",
        action="append",
        metavar="K=V[,K=V]",
        help="threshold overrides; repeat the flag to sweep",
    )
    add_common(sub)
    sub.set_defaults(handler=cmd_validate)

    sub = commands.add_parser("eval-grid", help="generator × reader × condition grid")
    sub.add_argument("--corpus", required=True, metavar="PATH")
    sub.add_argument("--qag", required=True, metavar="MODES")
    sub.add_argument("--qa", required=True, metavar="DESCS")
    sub.add_argument(
        "--conditions", default="claim,plus-paraphrase", metavar="NAMES"
    )
    sub.add_argument("--report", required=True, metavar="PATH")
    add_common(sub)
    sub.set_defaults(handler=cmd_eval_grid)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as exc:
        print(f"error: backend failure: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # stable exit-code contract for callers
        log.exception("internal error")
        print(f"error: internal failure: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
