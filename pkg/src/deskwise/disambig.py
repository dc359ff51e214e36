"""Clarifying-question generation over a bipartite concept-question graph.

When the classifier cannot separate the top candidates, their primary
questions are decomposed into concepts (noun-phrase heads, modifiers, verb
lemmas). Modifiers filling the same slot form buckets; asking about the
bucket that best balances the split narrows the candidate set fastest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from . import tagging
from .text import STOPWORDS, fold, tokenize, tokenize_with_spans

DEFAULT_TEMPLATE = "Do you need {options}?"


class DisambiguationError(ValueError):
    pass


class UnknownOptionError(DisambiguationError):
    pass


@dataclass(frozen=True)
class SlotEntry:
    values: tuple[str, ...]
    template: str = DEFAULT_TEMPLATE
    title_case: bool = True


def load_attribute_lexicon(path: str | Path | None = None) -> dict[str, SlotEntry]:
    """Slot key -> option values; read fresh on every call so edits to the
    data file take effect without restart."""
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    else:
        raw = json.loads(
            resources.files("deskwise").joinpath("data/attribute_lexicon.json").read_text("utf-8")
        )
    return {
        slot: SlotEntry(
            values=tuple(entry["values"]),
            template=entry.get("template", DEFAULT_TEMPLATE),
            title_case=entry.get("title_case", True),
        )
        for slot, entry in raw.items()
    }


@dataclass(frozen=True)
class Concept:
    value: str
    slot: str
    phrase: str


@dataclass(frozen=True)
class ConceptGraph:
    concepts: tuple[Concept, ...]
    question_ids: tuple[str, ...]
    questions: dict  # class id -> primary question
    edges: frozenset  # (concept index, class id)
    bare: frozenset   # class ids with no concepts
    consumed_slots: frozenset = frozenset()

    def questions_for(self, concept_idx: int) -> set[str]:
        return {q for c, q in self.edges if c == concept_idx}


@dataclass(frozen=True)
class ConceptBucket:
    slot: str
    options: tuple[Concept, ...]
    partition: dict  # option value -> tuple of class ids

    @property
    def max_cell(self) -> int:
        return max(len(v) for v in self.partition.values())

    @property
    def covered(self) -> set[str]:
        return {q for cell in self.partition.values() for q in cell}


@dataclass(frozen=True)
class ClarifyingQuestion:
    text: str
    options: tuple[str, ...]
    bucket: ConceptBucket


def _slot_for_modifier(modifier: str, head: str, lexicon: dict[str, SlotEntry]) -> str:
    for slot, entry in lexicon.items():
        if modifier in entry.values:
            return slot
    return f"{head}:attr"


def extract_concepts(
    question: str,
    lexicon: dict[str, SlotEntry] | None = None,
    tagger: tagging.Tagger | None = None,
) -> list[Concept]:
    """Noun-phrase heads, their modifiers (slotted via the attribute
    lexicon), and main-verb lemmas."""
    lexicon = lexicon if lexicon is not None else load_attribute_lexicon()
    tag = tagger or tagging.DEFAULT_TAGGER
    tokens = [t for t, _, _ in tokenize_with_spans(question)]
    tags = tag(tokens)
    concepts: list[Concept] = []
    seen: set[tuple[str, str]] = set()

    def add(value: str, slot: str, phrase: str) -> None:
        key = (fold(slot), fold(value))
        if key not in seen:
            seen.add(key)
            concepts.append(Concept(value=fold(value), slot=slot, phrase=phrase))

    for np in tagging.noun_phrases(tokens, tags):
        head = np.head
        if head in STOPWORDS:
            continue
        add(head, head, head)
        for modifier in np.modifiers:
            if modifier in STOPWORDS:
                continue
            add(modifier, _slot_for_modifier(modifier, head, lexicon), f"{modifier} {head}")
    for _, lemma in tagging.main_verbs(tokens, tags):
        if lemma not in STOPWORDS:
            add(lemma, "action", lemma)
    return concepts


def build_graph(
    candidates: list[tuple[str, str]],
    lexicon: dict[str, SlotEntry] | None = None,
    tagger: tagging.Tagger | None = None,
) -> ConceptGraph:
    """Bipartite concept/question graph over the top-k candidates'
    primary questions."""
    if len(candidates) < 2:
        raise DisambiguationError("nothing to disambiguate: need at least 2 candidates")
    lexicon = lexicon if lexicon is not None else load_attribute_lexicon()
    concepts: list[Concept] = []
    index: dict[tuple[str, str], int] = {}
    edges: set[tuple[int, str]] = set()
    bare: set[str] = set()
    questions: dict[str, str] = {}
    for class_id, question in candidates:
        questions[class_id] = question
        extracted = extract_concepts(question, lexicon, tagger)
        if not extracted:
            bare.add(class_id)
            continue
        for concept in extracted:
            key = (fold(concept.slot), concept.value)
            if key not in index:
                index[key] = len(concepts)
                concepts.append(concept)
            edges.add((index[key], class_id))
    return ConceptGraph(
        concepts=tuple(concepts),
        question_ids=tuple(questions),
        questions=questions,
        edges=frozenset(edges),
        bare=frozenset(bare),
    )


def _buckets(graph: ConceptGraph, lexicon: dict[str, SlotEntry]) -> list[ConceptBucket]:
    by_slot: dict[str, list[int]] = {}
    for i, concept in enumerate(graph.concepts):
        by_slot.setdefault(concept.slot, []).append(i)
    buckets = []
    for slot, concept_idxs in by_slot.items():
        if slot in graph.consumed_slots:
            continue
        options = []
        partition = {}
        for i in concept_idxs:
            qs = graph.questions_for(i)
            if qs:
                options.append(graph.concepts[i])
                partition[graph.concepts[i].value] = tuple(sorted(qs))
        if len(options) < 2:
            continue
        covered = {q for cell in partition.values() for q in cell}
        if len(covered) < 2:
            continue
        options = _order_options(slot, options, lexicon)
        buckets.append(ConceptBucket(slot=slot, options=tuple(options), partition=partition))
    return buckets


def _order_options(
    slot: str, options: list[Concept], lexicon: dict[str, SlotEntry]
) -> list[Concept]:
    entry = lexicon.get(slot)
    if entry is None:
        return sorted(options, key=lambda c: c.value)
    rank = {v: i for i, v in enumerate(entry.values)}
    return sorted(options, key=lambda c: (rank.get(c.value, len(rank)), c.value))


def best_bucket(
    graph: ConceptGraph,
    excluded: set[str] | frozenset = frozenset(),
    lexicon: dict[str, SlotEntry] | None = None,
) -> ConceptBucket | None:
    """The discriminating bucket with the smallest largest partition cell;
    ties fall to fewer options, then lexicographic slot key."""
    lexicon = lexicon if lexicon is not None else load_attribute_lexicon()
    candidates = [
        b
        for b in _buckets(graph, lexicon)
        if b.slot not in excluded and len(b.covered) >= 2
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda b: (b.max_cell, len(b.options), b.slot))


def _article(phrase: str) -> str:
    return "an" if phrase[:1].lower() in "aeiou" else "a"


def render_question(
    bucket: ConceptBucket, lexicon: dict[str, SlotEntry] | None = None
) -> ClarifyingQuestion:
    """Template clarifier: options are the concept phrases, title-cased for
    slots that name things rather than states."""
    lexicon = lexicon if lexicon is not None else load_attribute_lexicon()
    entry = lexicon.get(bucket.slot, SlotEntry(values=()))
    labels = []
    rendered = []
    for concept in bucket.options:
        label = concept.phrase.title() if entry.title_case else concept.phrase.lower()
        labels.append(label)
        rendered.append(f"{_article(label)} {label}")
    text = entry.template.format(options=" or ".join(rendered))
    return ClarifyingQuestion(text=text, options=tuple(labels), bucket=bucket)


def resolve_option(bucket: ConceptBucket, reply: str) -> str | None:
    """Map a user reply onto one bucket option value; None when the reply
    matches zero or several options."""
    folded = fold(reply.strip())
    reply_tokens = set(tokenize(reply))
    matches = []
    for concept in bucket.options:
        label_tokens = set(tokenize(concept.phrase))
        if (
            folded == concept.value
            or folded == fold(concept.phrase)
            or concept.value in reply_tokens
            or (label_tokens and label_tokens <= reply_tokens)
        ):
            matches.append(concept.value)
    return matches[0] if len(matches) == 1 else None


def graph_to_dict(graph: ConceptGraph) -> dict:
    return {
        "concepts": [[c.value, c.slot, c.phrase] for c in graph.concepts],
        "question_ids": list(graph.question_ids),
        "questions": dict(graph.questions),
        "edges": sorted([c, q] for c, q in graph.edges),
        "bare": sorted(graph.bare),
        "consumed_slots": sorted(graph.consumed_slots),
    }


def graph_from_dict(d: dict) -> ConceptGraph:
    return ConceptGraph(
        concepts=tuple(Concept(value=v, slot=s, phrase=p) for v, s, p in d["concepts"]),
        question_ids=tuple(d["question_ids"]),
        questions=dict(d["questions"]),
        edges=frozenset((c, q) for c, q in d["edges"]),
        bare=frozenset(d["bare"]),
        consumed_slots=frozenset(d["consumed_slots"]),
    )


def bucket_to_dict(bucket: ConceptBucket) -> dict:
    return {
        "slot": bucket.slot,
        "options": [[c.value, c.slot, c.phrase] for c in bucket.options],
        "partition": {v: list(qs) for v, qs in bucket.partition.items()},
    }


def bucket_from_dict(d: dict) -> ConceptBucket:
    return ConceptBucket(
        slot=d["slot"],
        options=tuple(Concept(value=v, slot=s, phrase=p) for v, s, p in d["options"]),
        partition={v: tuple(qs) for v, qs in d["partition"].items()},
    )


def narrow(graph: ConceptGraph, bucket: ConceptBucket, chosen: str) -> ConceptGraph:
    """Remove question nodes not incident to the chosen option's concept,
    drop orphaned concepts, and mark the bucket's slot consumed."""
    option = next((c for c in bucket.options if c.value == fold(chosen)), None)
    if option is None:
        option_value = resolve_option(bucket, chosen)
        if option_value is None:
            raise UnknownOptionError(f"option {chosen!r} is not in bucket {bucket.slot!r}")
        option = next(c for c in bucket.options if c.value == option_value)

    concept_idx = next(
        i
        for i, c in enumerate(graph.concepts)
        if c.slot == option.slot and c.value == option.value
    )
    keep_questions = graph.questions_for(concept_idx)
    kept_edges = {(c, q) for c, q in graph.edges if q in keep_questions}
    live_concepts = sorted({c for c, _ in kept_edges})
    remap = {old: new for new, old in enumerate(live_concepts)}
    return ConceptGraph(
        concepts=tuple(graph.concepts[i] for i in live_concepts),
        question_ids=tuple(q for q in graph.question_ids if q in keep_questions),
        questions={q: t for q, t in graph.questions.items() if q in keep_questions},
        edges=frozenset((remap[c], q) for c, q in kept_edges),
        bare=frozenset(),
        consumed_slots=graph.consumed_slots | {bucket.slot},
    )
