"""Extractive sentence selection by TextRank.

Sentence similarity is shared-token overlap normalized by log lengths; the
graph is ranked with damped power iteration. Dangling sentences spread their
mass uniformly, which keeps the score total equal to the sentence count.
"""

from __future__ import annotations

import math

from ..text import tokenize

DAMPING = 0.85
CONVERGENCE_DELTA = 1e-4
MAX_ITERATIONS = 100


def sentence_similarity(tokens_a: list[str], tokens_b: list[str]) -> float:
    if len(tokens_a) < 2 or len(tokens_b) < 2:
        return 0.0
    shared = len(set(tokens_a) & set(tokens_b))
    if shared == 0:
        return 0.0
    return shared / (math.log(len(tokens_a)) + math.log(len(tokens_b)))


def rank_sentences(sentences: list[str]) -> list[float]:
    """Power-iteration scores; sum equals len(sentences) after convergence."""
    n = len(sentences)
    if n == 0:
        return []
    token_lists = [tokenize(s) for s in sentences]
    weights = [[0.0] * n for _ in range(n)]
    out_sum = [0.0] * n
    for i in range(n):
        for j in range(i + 1, n):
            w = sentence_similarity(token_lists[i], token_lists[j])
            weights[i][j] = weights[j][i] = w
    for i in range(n):
        out_sum[i] = sum(weights[i])

    scores = [1.0] * n
    for _ in range(MAX_ITERATIONS):
        dangling = sum(s for s, out in zip(scores, out_sum) if out == 0.0) / n
        new = []
        for i in range(n):
            acc = 0.0
            for j in range(n):
                if weights[j][i] > 0.0 and out_sum[j] > 0.0:
                    acc += weights[j][i] / out_sum[j] * scores[j]
            new.append((1.0 - DAMPING) + DAMPING * (acc + dangling))
        delta = max(abs(a - b) for a, b in zip(new, scores))
        scores = new
        if delta < CONVERGENCE_DELTA:
            break
    return scores


def textrank_select(sentences: list[str], ratio: float = 0.10) -> list[str]:
    """Top ceil(ratio*n) sentences by TextRank score, returned in original
    order; ties break toward earlier position."""
    if not sentences:
        raise ValueError("need at least one sentence")
    scores = rank_sentences(sentences)
    keep = math.ceil(ratio * len(sentences))
    ranked = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
    chosen = sorted(ranked[:keep])
    return [sentences[i] for i in chosen]
