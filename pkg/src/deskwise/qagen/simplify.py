"""Sentence simplification by syntactic surgery that preserves truth:
split clause coordinations and hoist non-restrictive relative clauses."""

from __future__ import annotations

import re

from .. import tagging
from ..tagging import AUX, DET, NOUN, PRON, PROPN, VERB
from ..text import tokenize_with_spans

_REL_RE = re.compile(r"^(.+?),\s*(?:which|who)\s+(.+?),\s*(.+)$")
_COORDINATORS = ("and", "but", "or")
_NOMINAL_TAGS = {NOUN, PROPN, PRON}


def _has_finite_clause(text: str) -> bool:
    """A nominal followed somewhere by a verb or auxiliary."""
    tokens = [t for t, _, _ in tokenize_with_spans(text)]
    tags = tagging.DEFAULT_TAGGER(tokens)
    seen_nominal = False
    for tag in tags:
        if tag in _NOMINAL_TAGS:
            seen_nominal = True
        elif tag in (VERB, AUX) and seen_nominal:
            return True
    return False


def _trailing_noun_phrase(text: str) -> str:
    """The noun phrase (with determiner) that ends ``text``; falls back to
    the whole string."""
    spans = tokenize_with_spans(text)
    tokens = [t for t, _, _ in spans]
    tags = tagging.DEFAULT_TAGGER(tokens)
    end = len(tokens)
    start = end
    while start > 0 and tags[start - 1] in _NOMINAL_TAGS | {tagging.ADJ}:
        start -= 1
    if start == end:
        return text
    if start > 0 and tags[start - 1] == DET:
        start -= 1
    return text[spans[start][1] : spans[end - 1][2]]


def _split_coordination(sentence: str) -> list[str]:
    body = sentence.rstrip()
    terminal = ""
    if body and body[-1] in ".!?":
        body, terminal = body[:-1], body[-1]
    for coord in _COORDINATORS:
        for sep in (f", {coord} ", f" {coord} "):
            idx = body.find(sep)
            while idx > 0:
                left, right = body[:idx], body[idx + len(sep):]
                if _has_finite_clause(left) and _has_finite_clause(right):
                    return [left.rstrip(",") + ".", right + (terminal or ".")]
                idx = body.find(sep, idx + 1)
    return [sentence]


def simplify(sentence: str) -> list[str]:
    """Split top-level clause coordinations and extract "X, which VP," style
    relative clauses; returns the sentence unchanged when no rule applies."""
    results: list[str] = []
    m = _REL_RE.match(sentence.strip())
    if m:
        prefix, clause, rest = m.groups()
        np = _trailing_noun_phrase(prefix)
        results.append(f"{np} {clause}.")
        remainder = f"{prefix} {rest}"
        results.extend(_split_coordination(remainder))
    else:
        results.extend(_split_coordination(sentence))
    return results
