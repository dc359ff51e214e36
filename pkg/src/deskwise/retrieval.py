"""tf-idf inverted index over chunks with cosine ranking and highlights.

Weighting is fixed across the codebase: tf = 1 + ln(count),
idf = ln((N+1)/(df+1)) + 1, document and query vectors L2-normalized.
Incident clustering and the glossary reuse these weights so all
bag-of-words vectors in the system agree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .store import Chunk
from .richtext import plain_text
from .text import tokenize

INDEX_FORMAT_VERSION = 1


def tf_weight(count: int) -> float:
    return 1.0 + math.log(count) if count > 0 else 0.0


def idf_weight(n_docs: int, df: int) -> float:
    return math.log((n_docs + 1) / (df + 1)) + 1.0


def weighted_vector(tokens: list[str], idf: dict[str, float]) -> dict[str, float]:
    """L2-normalized tf-idf vector; tokens without an idf entry are dropped."""
    counts: dict[str, int] = {}
    for t in tokens:
        if t in idf:
            counts[t] = counts.get(t, 0) + 1
    vec = {t: tf_weight(c) * idf[t] for t, c in counts.items()}
    norm = math.sqrt(sum(w * w for w in vec.values()))
    if norm > 0:
        vec = {t: w / norm for t, w in vec.items()}
    return vec


def cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(w * b[t] for t, w in a.items() if t in b)


@dataclass(frozen=True)
class SearchHit:
    chunk_id: str
    score: float
    highlights: tuple[tuple[int, int], ...] = ()
    time_anchor: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "score": self.score,
            "highlights": [list(h) for h in self.highlights],
            "time_anchor": list(self.time_anchor) if self.time_anchor else None,
        }


@dataclass
class Index:
    """Immutable after build; queries share it concurrently."""

    n_docs: int = 0
    doc_ids: list[str] = field(default_factory=list)
    idf: dict[str, float] = field(default_factory=dict)
    postings: dict[str, list[int]] = field(default_factory=dict)
    vectors: list[dict[str, float]] = field(default_factory=list)
    doc_tokens: list[list[str]] = field(default_factory=list)
    anchors: list[tuple[float, float] | None] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "version": INDEX_FORMAT_VERSION,
            "n_docs": self.n_docs,
            "doc_ids": self.doc_ids,
            "idf": self.idf,
            "postings": self.postings,
            "vectors": self.vectors,
            "doc_tokens": self.doc_tokens,
            "anchors": [list(a) if a else None for a in self.anchors],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "Index":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        if d.get("version") != INDEX_FORMAT_VERSION:
            raise ValueError(f"unsupported index version {d.get('version')}")
        return cls(
            n_docs=d["n_docs"],
            doc_ids=d["doc_ids"],
            idf=d["idf"],
            postings=d["postings"],
            vectors=d["vectors"],
            doc_tokens=d["doc_tokens"],
            anchors=[tuple(a) if a else None for a in d["anchors"]],
        )


def build_index(chunks: list[Chunk]) -> Index:
    """Inverted index plus normalized tf-idf document vectors."""
    doc_tokens = [tokenize(plain_text(c.body)) for c in chunks]
    n = len(chunks)
    df: dict[str, int] = {}
    for tokens in doc_tokens:
        for t in set(tokens):
            df[t] = df.get(t, 0) + 1
    idf = {t: idf_weight(n, d) for t, d in sorted(df.items())}
    postings: dict[str, list[int]] = {t: [] for t in idf}
    for i, tokens in enumerate(doc_tokens):
        for t in sorted(set(tokens)):
            postings[t].append(i)
    vectors = [weighted_vector(tokens, idf) for tokens in doc_tokens]
    return Index(
        n_docs=n,
        doc_ids=[c.id for c in chunks],
        idf=idf,
        postings=postings,
        vectors=vectors,
        doc_tokens=doc_tokens,
        anchors=[c.time_anchor for c in chunks],
    )


def _highlights(doc_tokens: list[str], query_tokens: set[str]) -> tuple[tuple[int, int], ...]:
    """Maximal runs of matched query tokens as half-open token offsets;
    a lone matched token is a run of length one."""
    runs: list[tuple[int, int]] = []
    start = None
    for i, tok in enumerate(doc_tokens):
        if tok in query_tokens:
            if start is None:
                start = i
        elif start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(doc_tokens)))
    return tuple(runs)


def query(index: Index, text: str, k: int = 10) -> list[SearchHit]:
    """Top-k chunks by cosine between the query and document tf-idf vectors.

    Only documents sharing at least one query token are scored; ties break
    by chunk id ascending.
    """
    q_tokens = tokenize(text)
    q_vec = weighted_vector(q_tokens, index.idf)
    if not q_vec:
        return []
    candidates: set[int] = set()
    for t in q_vec:
        candidates.update(index.postings.get(t, ()))
    scored = []
    for i in sorted(candidates):
        s = cosine(q_vec, index.vectors[i])
        if s > 0:
            scored.append((-s, index.doc_ids[i], i))
    scored.sort()
    hits = []
    q_set = set(q_vec)
    for neg_s, doc_id, i in scored[:k]:
        hits.append(
            SearchHit(
                chunk_id=doc_id,
                score=-neg_s,
                highlights=_highlights(index.doc_tokens[i], q_set),
                time_anchor=index.anchors[i],
            )
        )
    return hits
