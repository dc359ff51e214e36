"""Rule-based question formation and quality filtering.

A fixed data-driven table keyed on role and entity class turns each frame
into zero or more questions; templates are realized with a small rule-based
conjugator. Extending coverage means adding a row, not code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Callable

from .. import tagging
from ..text import fold, tokenize
from .frames import Frame
from .glossary import Glossary

_MENTION_RE = re.compile(
    r"\bthe\s+(following|above|below)\s+(table|figure|diagram|chart|image|list)\b",
    re.IGNORECASE,
)
_PROCESS_RE = re.compile(r"^[Tt]o\s+(\w+)\s+([^,]+),\s*(.+)$")


@dataclass(frozen=True)
class GeneratedQuestion:
    text: str
    answer_span: str
    rule_id: str
    source_chunk_id: str = ""
    score: float = 1.0

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "answer_span": self.answer_span,
            "rule_id": self.rule_id,
            "source_chunk_id": self.source_chunk_id,
            "score": self.score,
        }


def _decap(span: str) -> str:
    """Lowercase a sentence-initial capital; acronyms and "I" keep theirs."""
    if not span or not span[0].isupper():
        return span
    first = span.split()[0]
    if first.isupper():
        return span
    return span[0].lower() + span[1:]


def _clean(text: str) -> str:
    return " ".join(text.split())


def _strip_terminal(text: str) -> str:
    return text.rstrip(" .!?,;")


def _q(template_parts: list[str]) -> str:
    return _clean(" ".join(p for p in template_parts if p)) + "?"


_3sg = tagging.third_singular


def _r1(f: Frame):
    if f.copula and not f.plural:
        return _q(["What is", _decap(f.arguments["copula_subject"])]), f.arguments["copula_complement"]
    return None


def _r2(f: Frame):
    if (
        not f.copula
        and not f.passive
        and "agent" in f.arguments
        and "patient" in f.arguments
        and f.entity_class.get(f.arguments["agent"]) == "person"
    ):
        return _q(["Who", _3sg(f.predicate), f.arguments["patient"]]), f.arguments["agent"]
    return None


def _r3(f: Frame):
    if (
        not f.copula
        and not f.passive
        and "agent" in f.arguments
        and "patient" in f.arguments
        and f.entity_class.get(f.arguments["agent"]) != "person"
    ):
        return _q(["What", _3sg(f.predicate), f.arguments["patient"]]), f.arguments["agent"]
    return None


def _r4(f: Frame):
    if not f.copula and not f.passive and "agent" in f.arguments and "patient" in f.arguments:
        return _q(["What does", _decap(f.arguments["agent"]), f.predicate]), f.arguments["patient"]
    return None


def _adjunct_rule(role: str, wh: str) -> Callable[[Frame], tuple[str, str] | None]:
    def rule(f: Frame):
        if role in f.arguments and "agent" in f.arguments and not f.copula:
            return (
                _q([wh, "does", _decap(f.arguments["agent"]), f.predicate, f.arguments.get("patient", "")]),
                f.arguments[role],
            )
        return None

    return rule


def _r8(f: Frame):
    m = _MENTION_RE.search(f.source_sentence)
    if m:
        rest = _strip_terminal(f.source_sentence[m.end():].strip())
        return f"What does the {m.group(2).lower()} describe?", rest or f.source_sentence
    return None


def _r9(f: Frame):
    if f.copula and f.plural:
        return _q(["What are", _decap(f.arguments["copula_subject"])]), f.arguments["copula_complement"]
    return None


def _r10(f: Frame):
    if f.passive and "agent" in f.arguments and "patient" in f.arguments:
        wh = "Who" if f.entity_class.get(f.arguments["agent"]) == "person" else "What"
        return _q([wh, _3sg(f.predicate), f.arguments["patient"]]), f.arguments["agent"]
    return None


def _r11(f: Frame):
    if f.predicate == "mean" and "agent" in f.arguments and "patient" in f.arguments:
        return _q(["What does", _decap(f.arguments["agent"]), "mean"]), f.arguments["patient"]
    return None


def _r12(f: Frame):
    m = _PROCESS_RE.match(f.source_sentence.strip())
    if m:
        verb, obj, todo = m.groups()
        return _q(["How do you", verb.lower(), _strip_terminal(obj)]), _strip_terminal(todo)
    return None


RULES: list[tuple[str, Callable[[Frame], tuple[str, str] | None]]] = [
    ("R1", _r1),
    ("R2", _r2),
    ("R3", _r3),
    ("R4", _r4),
    ("R5", _adjunct_rule("temporal", "When")),
    ("R6", _adjunct_rule("location", "Where")),
    ("R7", _adjunct_rule("manner", "How")),
    ("R8", _r8),
    ("R9", _r9),
    ("R10", _r10),
    ("R11", _r11),
    ("R12", _r12),
]


def form_questions(frame: Frame, source_chunk_id: str = "") -> list[GeneratedQuestion]:
    """Apply every matching rule; a pure function of the frame."""
    out = []
    for rule_id, rule in RULES:
        result = rule(frame)
        if result is None:
            continue
        text, answer = result
        if not answer:
            continue
        out.append(
            GeneratedQuestion(
                text=text,
                answer_span=answer,
                rule_id=rule_id,
                source_chunk_id=source_chunk_id,
            )
        )
    return out


def filter_questions(
    questions: list[GeneratedQuestion],
    glossary: Glossary,
    tagger: tagging.Tagger | None = None,
) -> list[GeneratedQuestion]:
    """Keep questions of sane length that carry a noun phrase and a glossary
    term; case-folded duplicates collapse to the first occurrence."""
    tag = tagger or tagging.DEFAULT_TAGGER
    retained: list[GeneratedQuestion] = []
    seen: set[str] = set()
    for q in questions:
        tokens = tokenize(q.text)
        tags = tag(tokens)
        checks = (
            4 <= len(tokens) <= 20,
            any(t in (tagging.NOUN, tagging.PROPN) for t in tags),
            glossary.contains_any(q.text),
        )
        score = sum(checks) / len(checks)
        if score < 1.0 or fold(q.text) in seen:
            continue
        seen.add(fold(q.text))
        retained.append(replace(q, score=score))
    return retained
