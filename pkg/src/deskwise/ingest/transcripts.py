"""Timed-transcript segmentation.

Transcripts arrive as word-level timed text with no punctuation guarantees;
sentence boundaries are induced from inter-word pauses and any sentence-final
tokens, then sentences are grouped into chunks carrying time anchors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..store import Chunk
from ..text import tokenize

DEFAULT_GAP_THRESHOLD = 0.8
DEFAULT_MAX_CHUNK_TOKENS = 512

_SENTENCE_FINAL = (".", "!", "?")


class UnorderedTranscriptError(ValueError):
    pass


@dataclass(frozen=True)
class TimedWord:
    word: str
    start: float
    end: float

    def validate(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"bad word timing: {self.word!r} [{self.start}, {self.end}]")


def load_timed_words(path: str | Path) -> list[TimedWord]:
    """JSONL of {"word","start","end"}."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            d = json.loads(line)
            words.append(TimedWord(word=d["word"], start=float(d["start"]), end=float(d["end"])))
    return words


def _sentences(
    words: list[TimedWord], gap_threshold: float
) -> list[tuple[list[TimedWord], bool]]:
    """(sentence, pause_follows) pairs; a pause gap both ends the sentence
    and forbids grouping it with the next one."""
    sentences: list[tuple[list[TimedWord], bool]] = []
    current: list[TimedWord] = []
    for i, w in enumerate(words):
        current.append(w)
        pause = i + 1 < len(words) and (words[i + 1].start - w.end) >= gap_threshold
        if pause or w.word.endswith(_SENTENCE_FINAL):
            sentences.append((current, pause))
            current = []
    if current:
        sentences.append((current, False))
    return sentences


def segment_transcript(
    words: list[TimedWord],
    gap_threshold: float = DEFAULT_GAP_THRESHOLD,
    max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS,
    source_id: str = "transcript",
) -> list[Chunk]:
    """Sentence-segment timed words and group sentences into chunks whose
    time anchors span first word start to last word end."""
    for w in words:
        w.validate()
    for prev, cur in zip(words, words[1:]):
        if cur.start < prev.start:
            raise UnorderedTranscriptError(
                f"word {cur.word!r} at {cur.start} starts before {prev.word!r} at {prev.start}"
            )
    if not words:
        return []

    groups: list[list[TimedWord]] = []
    current: list[TimedWord] = []
    count = 0
    for sentence, pause_follows in _sentences(words, gap_threshold):
        n = len(tokenize(" ".join(w.word for w in sentence)))
        if n > max_chunk_tokens:
            if current:
                groups.append(current)
                current, count = [], 0
            run: list[TimedWord] = []
            run_count = 0
            for w in sentence:
                wn = len(tokenize(w.word))
                if run and run_count + wn > max_chunk_tokens:
                    groups.append(run)
                    run, run_count = [], 0
                run.append(w)
                run_count += wn
            if run:
                if pause_follows:
                    groups.append(run)
                else:
                    current, count = run, run_count
            continue
        if count + n > max_chunk_tokens and current:
            groups.append(current)
            current, count = [], 0
        current.extend(sentence)
        count += n
        if pause_follows and current:
            # a long pause is a topic break; never group across it
            groups.append(current)
            current, count = [], 0
    if current:
        groups.append(current)

    chunks = []
    for i, group in enumerate(groups):
        body = " ".join(w.word for w in group)
        start = group[0].start
        end = group[-1].end
        # a zero-duration span would violate the anchor invariant
        end = max(end, start + 1e-3)
        chunks.append(
            Chunk(
                id=f"{source_id}#{i:04d}",
                source_id=source_id,
                heading_path=(),
                body=body,
                time_anchor=(start, end),
                token_count=len(tokenize(body)),
            )
        )
    return chunks
