"""Tiny rule-based POS tagger and phrase chunker.

Lexicon plus suffix heuristics, unknown words default to NOUN. Both the
question-generation frames and the disambiguation concept extractor run on
this; swap in a different tagger by passing any callable with the same
signature (tokens in, tags out).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

DET = "DET"
NOUN = "NOUN"
PROPN = "PROPN"
VERB = "VERB"
AUX = "AUX"
ADJ = "ADJ"
ADV = "ADV"
PRON = "PRON"
ADP = "ADP"
CONJ = "CONJ"
NUM = "NUM"
WH = "WH"
PART = "PART"
PUNCT = "PUNCT"

Tagger = Callable[[Sequence[str]], list[str]]

_DETS = {"a", "an", "the", "this", "that", "these", "those", "each", "every", "some", "any", "no", "another", "such"}
_AUX = {
    "is", "are", "was", "were", "am", "be", "been", "being",
    "has", "have", "had", "do", "does", "did",
    "can", "could", "will", "would", "shall", "should", "may", "might", "must",
}
_PRONOUNS = {
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them",
    "my", "your", "his", "her", "its", "our", "their", "myself", "yourself",
    "someone", "anyone", "everyone", "something", "anything",
}
_PREPS = {
    "in", "on", "at", "by", "for", "with", "from", "of", "into", "onto",
    "about", "over", "under", "after", "before", "during", "between",
    "through", "against", "via", "within", "without", "upon",
}
_CONJ = {"and", "or", "but", "nor", "yet", "plus"}
_WH = {"who", "what", "when", "where", "why", "how", "which", "whose", "whom"}
_ADJ = {
    "new", "old", "duplicate", "standalone", "simple", "complex", "quick",
    "easy", "slow", "big", "small", "large", "good", "bad", "active",
    "inactive", "valid", "invalid", "wrong", "correct", "full", "empty",
    "open", "closed", "high", "low", "next", "previous", "following",
    "above", "secure", "multiple", "main", "primary", "secondary", "free",
    "same", "different", "available", "common", "internal", "external",
    "temporary", "permanent", "lending", "standing", "monthly", "annual",
}
_ADV = {
    "very", "too", "really", "always", "never", "often", "sometimes",
    "now", "then", "here", "there", "again", "already", "still", "just",
    "directly", "immediately",
}
_VERBS = {
    "get", "set", "reset", "make", "take", "give", "go", "come", "want",
    "need", "use", "log", "work", "fail", "open", "close", "create",
    "delete", "update", "install", "configure", "run", "start", "stop",
    "restart", "click", "select", "enter", "submit", "apply", "send",
    "receive", "check", "verify", "contact", "call", "ask", "answer",
    "show", "display", "list", "describe", "explain", "store", "save",
    "load", "print", "access", "grant", "deny", "block", "unlock", "lock",
    "change", "fix", "resolve", "solve", "help", "request", "report",
    "upload", "download", "connect", "disconnect", "sign", "register",
    "renew", "cancel", "order", "pay", "charge", "issue", "lend", "borrow",
    "mean", "require", "include", "contain", "provide", "offer", "support",
    "enable", "disable", "assign", "expire", "clear", "see", "find",
    "follow", "add", "remove", "keep", "hold", "raise", "lower", "turn",
    "visit", "review", "approve", "reject", "escalate", "refresh",
}

_IRREGULAR_LEMMA = {
    "is": "be", "are": "be", "was": "be", "were": "be", "am": "be",
    "been": "be", "being": "be",
    "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "doing": "do", "done": "do",
    "goes": "go", "went": "go", "gone": "go", "going": "go",
    "got": "get", "gotten": "get", "getting": "get",
    "took": "take", "taken": "take", "taking": "take",
    "gave": "give", "given": "give", "giving": "give",
    "made": "make", "making": "make",
    "came": "come", "coming": "come",
    "saw": "see", "seen": "see", "seeing": "see",
    "found": "find", "held": "hold", "kept": "keep",
    "meant": "mean", "paid": "pay", "sent": "send", "lent": "lend",
}
_IRREGULAR_3SG = {"be": "is", "have": "has", "do": "does", "go": "goes"}

_VOWELS = set("aeiou")


def verb_lemma(token: str) -> str | None:
    """Base form when the token looks like an inflection of a known verb."""
    t = token.lower()
    if t in _IRREGULAR_LEMMA:
        return _IRREGULAR_LEMMA[t]
    if t in _VERBS:
        return t
    for suffix, restore in (("ies", "y"), ("es", ""), ("s", ""), ("ing", ""), ("ed", "")):
        if t.endswith(suffix) and len(t) > len(suffix) + 1:
            stem = t[: -len(suffix)] + restore
            if stem in _VERBS:
                return stem
            if suffix in ("ing", "ed"):
                if len(stem) > 2 and stem[-1] == stem[-2] and stem[:-1] in _VERBS:
                    return stem[:-1]  # running -> run
                if stem + "e" in _VERBS:
                    return stem + "e"  # making -> make
    return None


def third_singular(base: str) -> str:
    b = base.lower()
    if b in _IRREGULAR_3SG:
        return _IRREGULAR_3SG[b]
    if b.endswith(("s", "x", "z", "ch", "sh")):
        return b + "es"
    if b.endswith("y") and len(b) > 1 and b[-2] not in _VOWELS:
        return b[:-1] + "ies"
    return b + "s"


class RuleTagger:
    def __call__(self, tokens: Sequence[str]) -> list[str]:
        tags: list[str] = []
        for i, token in enumerate(tokens):
            tags.append(self._tag_one(token, i, tokens))
        # infinitive marker: "to" directly before a verb
        for i, token in enumerate(tokens):
            if token.lower() == "to" and i + 1 < len(tokens) and tags[i + 1] in (VERB, AUX):
                tags[i] = PART
        return tags

    def _tag_one(self, token: str, i: int, tokens: Sequence[str]) -> str:
        t = token.lower()
        if not any(c.isalnum() for c in token):
            return PUNCT
        if t.isdigit() or (any(c.isdigit() for c in t) and not t.isalpha()):
            return NUM
        if t in _WH:
            return WH
        if t in _DETS:
            return DET
        if t in _AUX:
            return AUX
        if t in _PRONOUNS:
            return PRON
        if t in _PREPS:
            return ADP
        if t in _CONJ:
            return CONJ
        if t in _ADJ:
            return ADJ
        if t in _ADV or (t.endswith("ly") and len(t) > 4):
            return ADV
        if verb_lemma(t) is not None:
            return VERB
        if token[0].isupper() and i > 0:
            return PROPN
        return NOUN


DEFAULT_TAGGER: Tagger = RuleTagger()

_NOMINAL = {NOUN, PROPN, NUM}


@dataclass(frozen=True)
class NounPhrase:
    tokens: tuple[str, ...]       # without leading determiner
    start: int                    # token index of first word (incl. determiner)
    end: int                      # token index past the last word
    determiner: str | None

    @property
    def head(self) -> str:
        return self.tokens[-1].lower()

    @property
    def modifiers(self) -> tuple[str, ...]:
        return tuple(t.lower() for t in self.tokens[:-1])

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def noun_phrases(tokens: Sequence[str], tags: Sequence[str]) -> list[NounPhrase]:
    """Maximal (Adj|Noun)*Noun spans, optionally preceded by a determiner."""
    phrases = []
    i = 0
    n = len(tokens)
    while i < n:
        det = None
        start = i
        j = i
        if tags[j] == DET:
            det = tokens[j]
            j += 1
        k = j
        while k < n and tags[k] in _NOMINAL | {ADJ}:
            k += 1
        # must end on a nominal; trim trailing adjectives
        while k > j and tags[k - 1] not in _NOMINAL:
            k -= 1
        if k > j:
            phrases.append(
                NounPhrase(tokens=tuple(tokens[j:k]), start=start, end=k, determiner=det)
            )
            i = k
        else:
            i = max(i + 1, j)
    return phrases


def main_verbs(tokens: Sequence[str], tags: Sequence[str]) -> list[tuple[int, str]]:
    """(index, lemma) of non-auxiliary verbs."""
    out = []
    for i, (token, tag) in enumerate(zip(tokens, tags)):
        if tag == VERB:
            lemma = verb_lemma(token) or token.lower()
            out.append((i, lemma))
    return out
