from __future__ import annotations

import pytest

from deskwise.ingest import TimedWord, UnorderedTranscriptError, segment_transcript


def words_with_gap(n=10, gap_after=4, gap=1.2, step=0.4, dur=0.3):
    out = []
    t = 0.0
    for i in range(n):
        out.append(TimedWord(word=f"w{i}", start=t, end=t + dur))
        t += step
        if i == gap_after:
            t += gap
    return out


def test_gap_splits_into_two_anchored_chunks():
    ws = words_with_gap()
    chunks = segment_transcript(ws, gap_threshold=0.8)
    assert len(chunks) == 2
    assert chunks[0].time_anchor == (ws[0].start, ws[4].end)
    assert chunks[1].time_anchor == (ws[5].start, ws[9].end)
    assert chunks[0].body == "w0 w1 w2 w3 w4"


def test_empty_word_list():
    assert segment_transcript([]) == []


def test_uniform_small_gaps_one_sentence():
    ws = [TimedWord(f"w{i}", i * 0.4, i * 0.4 + 0.3) for i in range(10)]
    chunks = segment_transcript(ws, gap_threshold=0.8)
    assert len(chunks) == 1
    assert chunks[0].token_count == 10


def test_sentence_final_token_splits():
    ws = [
        TimedWord("hello.", 0.0, 0.2),
        TimedWord("world", 0.3, 0.5),
    ]
    chunks = segment_transcript(ws, gap_threshold=10.0)
    # both sentences still fit one chunk; boundary affects grouping only
    assert chunks[0].body == "hello. world"


def test_unordered_timestamps_rejected():
    ws = [TimedWord("a", 1.0, 1.2), TimedWord("b", 0.5, 0.7)]
    with pytest.raises(UnorderedTranscriptError):
        segment_transcript(ws)


def test_anchor_union_covers_span_without_overlap():
    ws = words_with_gap(n=40, gap_after=7)
    chunks = segment_transcript(ws, gap_threshold=0.8, max_chunk_tokens=6)
    anchors = [c.time_anchor for c in chunks]
    assert anchors[0][0] == ws[0].start
    assert anchors[-1][1] == ws[-1].end
    for (s0, e0), (s1, e1) in zip(anchors, anchors[1:]):
        assert e0 <= s1  # ordered, non-overlapping


def test_max_tokens_respected():
    ws = [TimedWord(f"w{i}", i * 0.1, i * 0.1 + 0.05) for i in range(100)]
    chunks = segment_transcript(ws, gap_threshold=50.0, max_chunk_tokens=16)
    assert all(c.token_count <= 16 for c in chunks)
    assert " ".join(c.body for c in chunks) == " ".join(w.word for w in ws)
