"""Normalization of raw paraphrase-generator output into a clean list.

Generative models asked for "a list of paraphrases" come back with a handful
of common shapes: a bracketed list (sometimes valid JSON, sometimes not), or
one item per line with assorted numbering/bullet prefixes.  This module turns
any of those into a plain list of strings and refuses anything it cannot
read, so a prose ramble never gets split into garbage paraphrases.
"""

from __future__ import annotations

import json
import logging
import re

log = logging.getLogger(__name__)

__all__ = ["PostprocessError", "paraphrase_postprocess"]


class PostprocessError(ValueError):
    """Raw generator output could not be read as a list of paraphrases."""


# "1. text", "2) text", "3 - text", "- text", "* text"
_LINE_PREFIX = re.compile(r"^\s*(?:\d+\s*[.)\-:]|[-*•])\s*")
_QUOTES = "\"'“”‘’"


def _clean_item(item: str) -> str:
    return item.strip().strip(_QUOTES).strip()


def _from_bracketed(text: str) -> list[str] | None:
    if not (text.startswith("[") and text.endswith("]")):
        return None
    try:
        parsed = json.loads(text)
    except ValueError:
        parsed = None
    if isinstance(parsed, list) and all(isinstance(p, str) for p in parsed):
        # Valid JSON: items are exact, so no further cleaning.
        return [p for p in parsed if p.strip()]
    # Not valid JSON; fall back to a naive comma split of the interior.
    items = [_clean_item(part) for part in text[1:-1].split(",")]
    return [item for item in items if item]


def _from_lines(text: str) -> list[str]:
    items = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        items.append(_clean_item(_LINE_PREFIX.sub("", stripped)))
    return [item for item in items if item]


def paraphrase_postprocess(raw: str) -> list[str]:
    """Extract a non-empty list of paraphrases from raw generator text.

    Accepts a bracketed list (JSON or informal) or numbered/bulleted lines.
    A single unadorned line is taken to be a single paraphrase.  Multi-line
    prose with no list markers on any line is rejected: guessing at item
    boundaries would corrupt downstream filtering.
    """
    text = raw.strip()
    if not text:
        raise PostprocessError("generator returned empty output")

    bracketed = _from_bracketed(text)
    if bracketed is not None:
        if not bracketed:
            raise PostprocessError("bracketed list contained no items")
        return bracketed

    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) > 1 and not any(_LINE_PREFIX.match(line.strip()) for line in lines):
        log.error("unparseable paraphrase output: %r", raw)
        raise PostprocessError("multi-line output has no recognizable list structure")

    items = _from_lines(text)
    if not items:
        log.error("unparseable paraphrase output: %r", raw)
        raise PostprocessError("no paraphrases could be extracted")
    return items
