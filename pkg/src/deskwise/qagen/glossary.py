"""Domain glossary: top unigrams/bigrams by max tf-idf over the chunk corpus.

Sentences that touch no glossary term are dropped from question generation;
the vision module reuses the same terms for OCR spell correction.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..retrieval import idf_weight, tf_weight
from ..richtext import plain_text
from ..store import Chunk
from ..text import STOPWORDS, bigrams, tokenize

DEFAULT_TOP_M = 200


@dataclass(frozen=True)
class Glossary:
    scores: dict  # term -> max tf-idf over chunks

    @property
    def terms(self) -> set[str]:
        return set(self.scores)

    def contains_any(self, text: str) -> bool:
        tokens = tokenize(text)
        if any(t in self.scores for t in tokens):
            return True
        return any(b in self.scores for b in bigrams(tokens))

    def unigrams(self) -> set[str]:
        return {t for t in self.scores if " " not in t}


def _candidate_grams(tokens: list[str]) -> list[str]:
    grams = [t for t in tokens if t not in STOPWORDS and not t.isdigit()]
    grams += [
        b
        for b in bigrams(tokens)
        if all(w not in STOPWORDS and not w.isdigit() for w in b.split())
    ]
    return grams


def build_glossary(chunks: list[Chunk], top_m: int = DEFAULT_TOP_M) -> Glossary:
    if not chunks:
        raise ValueError("empty corpus")
    per_chunk_counts = []
    df: dict[str, int] = {}
    for chunk in chunks:
        counts: dict[str, int] = {}
        for g in _candidate_grams(tokenize(plain_text(chunk.body))):
            counts[g] = counts.get(g, 0) + 1
        per_chunk_counts.append(counts)
        for g in counts:
            df[g] = df.get(g, 0) + 1

    n = len(chunks)
    best: dict[str, float] = {}
    for counts in per_chunk_counts:
        for g, c in counts.items():
            w = tf_weight(c) * idf_weight(n, df[g])
            if w > best.get(g, 0.0):
                best[g] = w
    top = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))[:top_m]
    return Glossary(scores=dict(top))
