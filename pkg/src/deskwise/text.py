"""Shared text primitives: tokenization, stopwords, edit distance, fuzzy lookup.

Every module that touches text goes through :func:`tokenize` so that search,
clustering, classification and the glossary agree on token boundaries:
lowercase, split on non-alphanumerics, drop empties, no stemming.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_WORD_RE = re.compile(r"\w+|[^\w\s]")
_SENT_RE = re.compile(r"(?<=[.!?])\s+")

STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because
    been before being below between both but by can cannot could did do does
    doing down during each few for from further had has have having he her
    here hers herself him himself his how i if in into is it its itself just
    me more most my myself no nor not now of off on once only or other our
    ours ourselves out over own same she should so some such than that the
    their theirs them themselves then there these they this those through to
    too under until up very was we were what when where which while who whom
    why will with you your yours yourself yourselves
    """.split()
)


def fold(text: str) -> str:
    """Canonical form for uniqueness checks: plain lowercase."""
    return text.lower()


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric tokens, in order."""
    return _TOKEN_RE.findall(text.lower())


def tokenize_with_spans(text: str) -> list[tuple[str, int, int]]:
    """Case-preserving word/punct tokens with character offsets."""
    return [(m.group(), m.start(), m.end()) for m in _WORD_RE.finditer(text)]


def bigrams(tokens: list[str]) -> list[str]:
    return [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


def split_sentences(text: str) -> list[str]:
    """Split on sentence-final punctuation followed by whitespace."""
    parts = [p.strip() for p in _SENT_RE.split(text)]
    return [p for p in parts if p]


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def fuzzy_lookup(token: str, vocabulary: set[str], max_distance: int = 2) -> str | None:
    """Unique closest vocabulary word within ``max_distance`` sharing the
    first character; None when the token is unknown and zero or several
    candidates tie at the minimal distance."""
    t = token.lower()
    if t in vocabulary:
        return t
    if not t:
        return None
    best: list[str] = []
    best_d = max_distance + 1
    for word in vocabulary:
        if not word or word[0] != t[0]:
            continue
        if abs(len(word) - len(t)) > max_distance:
            continue
        d = levenshtein(t, word)
        if d < best_d:
            best_d, best = d, [word]
        elif d == best_d:
            best.append(word)
    if len(best) == 1 and best_d <= max_distance:
        return best[0]
    return None
