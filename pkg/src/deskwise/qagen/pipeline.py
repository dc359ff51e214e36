"""End-to-end question generation over a chunk corpus."""

from __future__ import annotations

import json
from pathlib import Path

from ..richtext import plain_text
from ..store import Chunk
from ..text import split_sentences
from .frames import extract_frames
from .glossary import DEFAULT_TOP_M, build_glossary
from .questions import GeneratedQuestion, filter_questions, form_questions
from .simplify import simplify
from .textrank import textrank_select


def generate_candidates(
    chunks: list[Chunk],
    ratio: float = 0.10,
    top_m: int = DEFAULT_TOP_M,
) -> list[GeneratedQuestion]:
    """Select salient sentences per chunk, simplify, extract frames, form
    questions, and filter; returns candidates for human review."""
    glossary = build_glossary(chunks, top_m=top_m)
    raw: list[GeneratedQuestion] = []
    for chunk in chunks:
        sentences = split_sentences(plain_text(chunk.body))
        if not sentences:
            continue
        selected = textrank_select(sentences, ratio=ratio)
        selected = [s for s in selected if glossary.contains_any(s)]
        for sentence in selected:
            for simple in simplify(sentence):
                for frame in extract_frames(simple):
                    raw.extend(form_questions(frame, source_chunk_id=chunk.id))
    return filter_questions(raw, glossary)


def write_candidates(path: str | Path, questions: list[GeneratedQuestion]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(json.dumps(q.to_dict(), ensure_ascii=False) + "\n")
