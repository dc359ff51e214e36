from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from deskwise.text import (
    bigrams,
    fuzzy_lookup,
    levenshtein,
    split_sentences,
    tokenize,
    tokenize_with_spans,
)


def test_tokenize_lowercases_and_splits_on_non_alnum():
    assert tokenize("Reset my PASSWORD, now!") == ["reset", "my", "password", "now"]
    assert tokenize("a-b_c") == ["a", "b", "c"]
    assert tokenize("") == []


def test_tokenize_with_spans_offsets_are_verbatim():
    text = "The admin resets it."
    for token, start, end in tokenize_with_spans(text):
        assert text[start:end] == token


def test_bigrams():
    assert bigrams(["a", "b", "c"]) == ["a b", "b c"]
    assert bigrams(["solo"]) == []


def test_split_sentences():
    assert split_sentences("One. Two? Three!") == ["One.", "Two?", "Three!"]
    assert split_sentences("no terminal") == ["no terminal"]


def test_levenshtein_known_values():
    assert levenshtein("", "") == 0
    assert levenshtein("abc", "abc") == 0
    assert levenshtein("pasword", "password") == 1
    assert levenshtein("kitten", "sitting") == 3


@given(st.text(max_size=12), st.text(max_size=12))
def test_levenshtein_symmetry_and_bounds(a, b):
    d = levenshtein(a, b)
    assert d == levenshtein(b, a)
    assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))


@given(st.text(max_size=10), st.text(max_size=10), st.text(max_size=10))
def test_levenshtein_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


def test_fuzzy_lookup_unique_within_two():
    assert fuzzy_lookup("pasword", {"password", "portal"}) == "password"
    assert fuzzy_lookup("password", {"password"}) == "password"


def test_fuzzy_lookup_ambiguous_or_distant_is_none():
    assert fuzzy_lookup("cat", {"car", "can"}) is None
    assert fuzzy_lookup("zzzzzz", {"password"}) is None
    # first character must match
    assert fuzzy_lookup("assword", {"password"}) is None
