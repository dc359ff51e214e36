"""Shallow frame extraction from declarative sentences.

POS-pattern heuristics stand in for a trained role labeler: copula and
subject/verb/object patterns give the core roles, prepositional cues give
location/temporal/manner adjuncts, and a gazetteer plus shape rules assign
entity classes. The tagger is pluggable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .. import tagging
from ..tagging import ADP, ADV, AUX, DET, NounPhrase, VERB, noun_phrases, verb_lemma
from ..text import tokenize_with_spans

_COPULA_FORMS = {"is", "are", "was", "were", "am"}
_PLURAL_COPULA = {"are", "were"}

PERSON_WORDS = {
    "admin", "administrator", "user", "customer", "agent", "manager",
    "employee", "engineer", "operator", "technician", "developer",
    "analyst", "owner", "member", "staff", "person", "client",
    "supervisor", "specialist", "representative", "consultant", "expert",
    "he", "she", "i", "you", "we", "they", "who",
}
ORG_WORDS = {
    "company", "bank", "team", "department", "vendor", "organization",
    "provider", "firm", "group", "unit", "division", "helpdesk",
}
LOCATION_WORDS = {
    "office", "server", "portal", "page", "site", "room", "building",
    "menu", "screen", "tab", "city", "country", "branch", "datacenter",
    "warehouse", "desk", "floor", "section", "website", "dashboard",
    "console", "folder", "directory", "drive",
}
TEMPORAL_WORDS = {
    "today", "tomorrow", "yesterday", "daily", "weekly", "monthly",
    "annually", "now", "later", "midnight", "noon",
    "january", "february", "march", "april", "may", "june", "july",
    "august", "september", "october", "november", "december",
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
    "sunday",
}
_MONTHS = {m for m in TEMPORAL_WORDS if m[0] in "jfmasond" and len(m) > 3}


@dataclass(frozen=True)
class Frame:
    predicate: str
    arguments: dict[str, str]
    source_sentence: str
    entity_class: dict[str, str] = field(default_factory=dict)
    copula: bool = False
    plural: bool = False
    passive: bool = False


def classify_entity(span_text: str) -> str:
    words = span_text.split()
    if not words:
        return "other"
    head = words[-1].lower()
    lowered = [w.lower() for w in words]
    if head in PERSON_WORDS:
        return "person"
    if head in ORG_WORDS:
        return "org"
    if head in LOCATION_WORDS:
        return "location"
    if any(w in _MONTHS for w in lowered) and any(any(c.isdigit() for c in w) for w in words):
        return "time"
    if head in TEMPORAL_WORDS or re.fullmatch(r"(19|20)\d\d", head):
        return "time"
    if sum(1 for w in words if w[0].isupper()) >= 2:
        return "org"
    return "other"


class _SentenceView:
    def __init__(self, sentence: str, tagger: tagging.Tagger):
        self.sentence = sentence
        self.spans = tokenize_with_spans(sentence)
        self.tokens = [t for t, _, _ in self.spans]
        self.tags = tagger(self.tokens)
        self.nps = noun_phrases(self.tokens, self.tags)

    def text_of(self, np: NounPhrase) -> str:
        return self.sentence[self.spans[np.start][1] : self.spans[np.end - 1][2]]

    def np_before(self, idx: int) -> NounPhrase | None:
        best = None
        for np in self.nps:
            if np.end <= idx:
                best = np
        return best

    def np_at_or_after(self, idx: int) -> NounPhrase | None:
        for np in self.nps:
            if np.start >= idx:
                return np
        return None


def _participle(view: _SentenceView, idx: int) -> str | None:
    """Lemma when tokens[idx] looks like a past participle."""
    if idx >= len(view.tokens):
        return None
    token = view.tokens[idx].lower()
    if view.tags[idx] == VERB and (token.endswith("ed") or verb_lemma(token) == token):
        return verb_lemma(token) or token
    return None


def extract_frames(sentence: str, tagger: tagging.Tagger | None = None) -> list[Frame]:
    """At most one frame per sentence; empty when no verb is found."""
    view = _SentenceView(sentence, tagger or tagging.DEFAULT_TAGGER)
    if not view.nps:
        return []

    args: dict[str, str] = {}
    predicate = None
    copula = plural = passive = False

    cop_idx = next(
        (
            i
            for i, (tok, tag) in enumerate(zip(view.tokens, view.tags))
            if tag == AUX and tok.lower() in _COPULA_FORMS
        ),
        None,
    )
    if cop_idx is not None:
        subject = view.np_before(cop_idx)
        after = cop_idx + 1
        while after < len(view.tokens) and view.tags[after] == ADV:
            after += 1
        verbal = after < len(view.tokens) and view.tags[after] == VERB
        if subject is not None and verbal and view.tokens[after].lower().endswith("ing"):
            # progressive: "X is getting Y" is an ordinary active frame
            predicate = verb_lemma(view.tokens[after]) or view.tokens[after].lower()
            args["agent"] = view.text_of(subject)
            obj = view.np_at_or_after(after + 1)
            if obj is not None and view.tags[max(obj.start - 1, 0)] not in (ADP, tagging.PART):
                args["patient"] = view.text_of(obj)
        elif subject is not None and verbal:
            # passive: "X is <participle> [by Y]"
            predicate = _participle(view, after) or view.tokens[after].lower()
            passive = True
            args["patient"] = view.text_of(subject)
            by_idx = next(
                (
                    i
                    for i in range(after + 1, len(view.tokens))
                    if view.tokens[i].lower() == "by"
                ),
                None,
            )
            if by_idx is not None:
                by_np = view.np_at_or_after(by_idx + 1)
                if by_np is not None:
                    args["agent"] = view.text_of(by_np)
        else:
            complement = view.np_at_or_after(after)
            if subject is not None and complement is not None:
                predicate = "be"
                copula = True
                plural = view.tokens[cop_idx].lower() in _PLURAL_COPULA
                args["copula_subject"] = view.text_of(subject)
                args["copula_complement"] = view.text_of(complement)

    if predicate is None:
        verb_idx = next(
            (i for i, tag in enumerate(view.tags) if tag == VERB), None
        )
        if verb_idx is None:
            return []
        predicate = verb_lemma(view.tokens[verb_idx]) or view.tokens[verb_idx].lower()
        agent = view.np_before(verb_idx)
        if agent is not None:
            args["agent"] = view.text_of(agent)
        else:
            pron_idx = next(
                (
                    i
                    for i in range(verb_idx - 1, -1, -1)
                    if view.tags[i] == tagging.PRON
                ),
                None,
            )
            if pron_idx is not None:
                args["agent"] = view.tokens[pron_idx]
        obj = view.np_at_or_after(verb_idx + 1)
        if obj is not None and view.tags[max(obj.start - 1, 0)] not in (ADP, tagging.PART):
            args["patient"] = view.text_of(obj)

    # prepositional adjuncts and temporal cues
    for i, (tok, tag) in enumerate(zip(view.tokens, view.tags)):
        low = tok.lower()
        if tag == ADP and low in {"in", "at", "on"}:
            np = view.np_at_or_after(i + 1)
            if np is not None and np.head in LOCATION_WORDS and "location" not in args:
                args["location"] = view.text_of(np)
        elif (low in {"by", "via"} and not passive) or low == "using":
            np = view.np_at_or_after(i + 1)
            if np is not None and np.start - i <= 2 and "manner" not in args:
                args["manner"] = view.text_of(np)
        elif low in TEMPORAL_WORDS and "temporal" not in args:
            container = next(
                (np for np in view.nps if np.start <= i < np.end), None
            )
            args["temporal"] = view.text_of(container) if container else tok

    if not args:
        return []
    entity_class = {span: classify_entity(span) for span in args.values()}
    return [
        Frame(
            predicate=predicate,
            arguments=args,
            source_sentence=sentence,
            entity_class=entity_class,
            copula=copula,
            plural=plural,
            passive=passive,
        )
    ]
