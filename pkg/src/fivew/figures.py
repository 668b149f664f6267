"""Report figures rendered to PNG files next to the delimited outputs.

Everything draws through the Agg canvas with pinned dpi and no timestamps,
so rendering the same data twice produces byte-identical files.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .corpus import CorpusStats, EntailmentClass
from .paraphrase import ParaphraseModelReport
from .srl5w import QUESTION_WS
from .verdict import ClaimVerdictReport, EvalGridCell, VerdictClass

log = logging.getLogger(__name__)

DPI = 100

_CLASS_COLORS = {
    VerdictClass.SUPPORTED: "#2a9d3f",
    VerdictClass.REFUTED: "#c23b22",
    VerdictClass.NOT_VERIFIABLE: "#888888",
}


def save_figure(fig, path: "str | Path") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, metadata={"Software": None})
    plt.close(fig)
    log.debug("wrote figure %s", path)
    return path


def diversity_figure(reports: Sequence[ParaphraseModelReport]):
    """One line per model: mean diversity score by paraphrase index."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for report in reports:
        if report.incomplete or not report.per_index_diversity:
            continue
        xs = [index for index, _ in report.per_index_diversity]
        ys = [value for _, value in report.per_index_diversity]
        ax.plot(xs, ys, marker="o", label=report.model_id)
    ax.set_xlabel("paraphrase index")
    ax.set_ylabel("mean diversity (inverse overlap)")
    ax.set_title("Paraphrase diversity by index")
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def stats_figure(stats: CorpusStats):
    """Claim counts per entailment class."""
    classes = list(EntailmentClass)
    counts = [stats.per_class[cls].claims for cls in classes]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.bar([cls.value for cls in classes], counts, color="#4878a8")
    ax.set_ylabel("claims")
    ax.set_title("Corpus composition by class")
    for i, count in enumerate(counts):
        ax.text(i, count, str(count), ha="center", va="bottom", fontsize=9)
    fig.tight_layout()
    return fig


def verdict_figure(reports: Sequence[ClaimVerdictReport]):
    """Stacked verdict counts for each question word across all claims."""
    counts = {
        w: {cls: 0 for cls in VerdictClass} for w in QUESTION_WS
    }
    for report in reports:
        for w, cls in report.rollup.items():
            counts[w][cls] += 1
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    labels = [w.value for w in QUESTION_WS]
    bottoms = [0] * len(QUESTION_WS)
    for cls in VerdictClass:
        values = [counts[w][cls] for w in QUESTION_WS]
        ax.bar(
            labels,
            values,
            bottom=bottoms,
            label=cls.value,
            color=_CLASS_COLORS[cls],
        )
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.set_ylabel("claims")
    ax.set_title("Verdicts by question word")
    ax.legend()
    fig.tight_layout()
    return fig


def sweep_figure(points: Sequence[tuple[float, int]]):
    """Supported-claim counts as the support threshold moves."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    xs = [tau for tau, _ in points]
    ys = [count for _, count in points]
    ax.plot(xs, ys, marker="o", color="#2a9d3f")
    ax.set_xlabel("support threshold (token F1)")
    ax.set_ylabel("claims supported")
    ax.set_title("Support threshold sweep")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def grid_figure(cells: Sequence[EvalGridCell]):
    """Mean token F1 per grid cell, one bar per combination."""
    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    labels = [
        f"{c.qag_model}\n{c.qa_model}\n{c.condition.value}" for c in cells
    ]
    values = [c.f1 for c in cells]
    colors = ["#b0b0b0" if c.incomplete else "#4878a8" for c in cells]
    ax.bar(range(len(cells)), values, color=colors)
    ax.set_xticks(range(len(cells)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("mean token F1")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Generator × reader grid")
    fig.tight_layout()
    return fig


def presence_figure(fractions: Mapping) -> "matplotlib.figure.Figure":
    """Fraction of claims carrying each question word."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    labels = [w.value for w in fractions]
    values = list(fractions.values())
    ax.bar(labels, values, color="#4878a8")
    ax.set_ylabel("fraction of claims")
    ax.set_ylim(0.0, 1.0)
    ax.set_title("Question-word coverage")
    fig.tight_layout()
    return fig
