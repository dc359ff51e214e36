from __future__ import annotations

import math

import numpy as np
import pytest

from deskwise.qagen import rank_sentences, textrank_select
from deskwise.text import tokenize


def dense_power_iteration(sentences, damping=0.85, tol=1e-4, max_iter=100):
    """Independent oracle: same ranking math on dense numpy matrices."""
    n = len(sentences)
    toks = [tokenize(s) for s in sentences]
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j and len(toks[i]) >= 2 and len(toks[j]) >= 2:
                shared = len(set(toks[i]) & set(toks[j]))
                if shared:
                    w[i, j] = shared / (math.log(len(toks[i])) + math.log(len(toks[j])))
    out = w.sum(axis=1)
    scores = np.ones(n)
    for _ in range(max_iter):
        dangling = scores[out == 0].sum() / n
        acc = np.zeros(n)
        nz = out > 0
        if nz.any():
            acc = (w[nz] / out[nz, None] * scores[nz, None]).sum(axis=0)
        new = (1 - damping) + damping * (acc + dangling)
        if np.abs(new - scores).max() < tol:
            scores = new
            break
        scores = new
    return scores


def hub_corpus(n=20):
    hub = "alpha beta gamma delta epsilon zeta eta theta"
    others = [
        f"{word} filler{i} extra{i} more{i}"
        for i, word in enumerate(
            ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"] * 3
        )
    ]
    return [hub] + others[: n - 1]


def test_single_sentence_selected():
    assert textrank_select(["Only one."]) == ["Only one."]


def test_zero_overlap_uniform_scores_tie_break_by_position():
    sentences = [f"unique{i} word{i} token{i}" for i in range(30)]
    scores = rank_sentences(sentences)
    assert max(scores) - min(scores) < 1e-12
    assert textrank_select(sentences, ratio=0.10) == sentences[:3]


def test_hub_sentence_ranked_first_matches_dense_oracle():
    sentences = hub_corpus()
    scores = rank_sentences(sentences)
    oracle = dense_power_iteration(sentences)
    assert int(np.argmax(oracle)) == 0
    assert scores.index(max(scores)) == 0
    assert np.abs(np.array(scores) - oracle).max() < 1e-4


def test_selected_count_is_ceil_ratio_n():
    for n in range(1, 201):
        sentences = [f"s{i} tok{i} other{i}" for i in range(n)]
        assert len(textrank_select(sentences, ratio=0.10)) == math.ceil(0.10 * n)


def test_scores_sum_to_n():
    for sentences in (hub_corpus(), [f"only{i} two{i}" for i in range(7)]):
        scores = rank_sentences(sentences)
        assert sum(scores) == pytest.approx(len(sentences), abs=1e-3)


def test_short_sentences_do_not_blow_up():
    # <2 tokens means similarity 0 by definition; log(1)=0 must not divide
    scores = rank_sentences(["a", "b c d", "b c e"])
    assert all(s > 0 for s in scores)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        textrank_select([])
