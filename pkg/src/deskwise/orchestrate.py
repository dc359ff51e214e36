"""Dialog orchestration: classifier first, disambiguation when unsure,
search as fallback, automaton execution behind explicit consent, and hand-off
to a human agent.

Sessions are persisted state machines. Per-session processing is strictly
sequential; each turn reads the current model and index once so a retrain
mid-conversation never splits one turn's view.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from typing import Callable

from . import classify, disambig, retrieval
from .config import AppConfig, OrchestratorConfig
from .harvest import Harvester
from .store import AutomatonRef, FeedbackEvent, Store, UnknownIdError, ValidationError
from .text import STOPWORDS, fold, fuzzy_lookup, tokenize

AWAITING = "AwaitingQuestion"
DISAMBIGUATING = "Disambiguating"
ANSWER_SHOWN = "AnswerShown"
AUTOMATON_PENDING = "AutomatonPending"
SEARCHING = "Searching"
HANDED_OFF = "HandedOff"
CLOSED = "Closed"

PHASES = {AWAITING, DISAMBIGUATING, ANSWER_SHOWN, AUTOMATON_PENDING, SEARCHING, HANDED_OFF, CLOSED}

AFFIRMATIVE = {"yes", "yeah", "yep", "sure", "ok", "okay", "affirmative", "approve", "proceed", "y"}
NEGATIVE = {"no", "nope", "n", "dont", "decline", "negative", "cancel", "stop"}
_QUESTION_STARTERS = {
    "who", "what", "when", "where", "why", "how", "which",
    "can", "could", "do", "does", "did", "is", "are", "was", "were",
    "will", "would", "should", "may", "might", "am", "have", "has", "shall",
}


class SessionClosedError(ValidationError):
    pass


class AutomatonAdapter:
    """Execution boundary for automatons; swap in a webhook or a fake."""

    def __call__(self, command: str) -> tuple[int, str]:
        import shlex
        import subprocess

        try:
            proc = subprocess.run(
                shlex.split(command), capture_output=True, text=True, timeout=60
            )
            return proc.returncode, (proc.stdout + proc.stderr).strip()
        except Exception as exc:
            return 1, str(exc)


def normalize_input(
    text: str,
    pending_options: list[str] | None = None,
    vocabulary: set[str] | None = None,
) -> dict:
    """Intent guess (question / statement / choice / noop) plus entities
    fuzzy-matched against the domain vocabulary."""
    stripped = text.strip()
    tokens = tokenize(stripped)
    entities = []
    if vocabulary:
        seen = set()
        for tok in tokens:
            if tok in STOPWORDS:
                continue
            match = fuzzy_lookup(tok, vocabulary)
            if match and match not in seen:
                seen.add(match)
                entities.append(match)
    if not tokens:
        return {"intent": "noop", "entities": entities, "tokens": tokens}
    intent = "statement"
    if _matches_option(stripped, pending_options or []):
        intent = "choice"
    elif stripped.endswith("?") or tokens[0] in _QUESTION_STARTERS:
        intent = "question"
    return {"intent": intent, "entities": entities, "tokens": tokens}


def _matches_option(text: str, options: list[str]) -> bool:
    folded = fold(text.strip())
    if any(fold(o) == folded for o in options):
        return True
    text_tokens = set(tokenize(text))
    hits = [o for o in options if set(tokenize(o)) and set(tokenize(o)) <= text_tokens]
    return len(hits) == 1


def _is_affirmative(text: str) -> bool:
    tokens = tokenize(text)
    return bool(tokens) and (tokens[0] in AFFIRMATIVE or fold(text.strip()) in {"go ahead", "do it"})


def _is_negative(text: str) -> bool:
    tokens = tokenize(text)
    return bool(tokens) and tokens[0] in NEGATIVE


def _utcnow_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class Engine:
    """Ties the store, classifier, search index, disambiguator, and harvest
    hooks into one turn handler."""

    def __init__(
        self,
        store: Store,
        config: AppConfig | None = None,
        automaton_adapter: Callable[[str], tuple[int, str]] | None = None,
        lexicon: dict | None = None,
        clock: Callable[[], str] | None = None,
    ):
        self.store = store
        self.config = config or AppConfig.default()
        self.config.orchestrator.validate()
        self.adapter = automaton_adapter or AutomatonAdapter()
        self.lexicon = lexicon if lexicon is not None else disambig.load_attribute_lexicon()
        self.harvester = Harvester(store, w_promote=self.config.w_promote)
        self._now = clock or _utcnow_iso

        self.model: classify.Model | None = None
        self.index: retrieval.Index | None = None
        self._model_lock = threading.Lock()
        self._train_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self.queue_changed = threading.Condition()
        self._vocab_cache: tuple[int, set[str]] | None = None

    # ----------------------------------------------------------- lifecycle

    def rebuild_index(self) -> retrieval.Index:
        index = retrieval.build_index(self.store.chunks())
        self.index = index
        return index

    def train_model(self, epochs: int | None = None, seed: int | None = None) -> classify.Model:
        """Train from the current snapshot; at most one job at a time, the
        serving model swaps atomically on success."""
        if not self._train_lock.acquire(blocking=False):
            raise ValidationError("a training job is already running")
        try:
            snapshot = self.store.snapshot()
            ts = classify.TrainingSet.from_snapshot(snapshot)
            model = classify.train(
                ts,
                epochs=epochs or self.config.epochs,
                lambda_=self.config.lambda_,
                seed=self.config.seed if seed is None else seed,
            )
            with self._model_lock:
                self.model = model
            return model
        finally:
            self._train_lock.release()

    def _vocabulary(self) -> set[str]:
        snap = self.store.snapshot()
        if self._vocab_cache and self._vocab_cache[0] == snap.id:
            return self._vocab_cache[1]
        vocab: set[str] = set()
        for unit in snap.answer_units:
            for q in unit.all_questions():
                vocab.update(t for t in tokenize(q) if t not in STOPWORDS)
            if unit.automaton:
                for entity in unit.automaton.required_entities:
                    vocab.update(entity.lower().split("_"))
                    vocab.add(entity.lower())
        self._vocab_cache = (snap.id, vocab)
        return vocab

    # ------------------------------------------------------------ sessions

    def create_session(self) -> dict:
        session_id = self.store.create_session(
            {
                "id": "",
                "phase": AWAITING,
                "active_question": "",
                "candidates": [],
                "graph": None,
                "bucket": None,
                "pending_options": [],
                "clarify_count": 0,
                "pending_automaton": None,
                "pending_entity": None,
                "entities": {},
                "answer_unit_id": None,
                "assigned_agent": None,
            }
        )
        return self.store.get_session(session_id)

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def _append(self, session_id: str, actor: str, payload: dict) -> dict:
        session = self.store.get_session(session_id)
        turn = {
            "index": len(session["turns"]),
            "actor": actor,
            "payload": payload,
            "timestamp": self._now(),
        }
        self.store.append_turn(session_id, turn)
        return turn

    # ---------------------------------------------------------- turn logic

    def handle_turn(
        self,
        session_id: str,
        text: str | None = None,
        image_query: dict | None = None,
        image_id: str | None = None,
        as_choice: bool = False,
    ) -> list[dict]:
        """Process one user input; returns the system turns it produced."""
        with self._session_lock(session_id):
            model = self.model
            index = self.index
            session = self.store.get_session(session_id)
            phase = session["phase"]
            if phase == CLOSED:
                raise SessionClosedError(f"session {session_id} is closed")

            if image_query is not None:
                payload = {"kind": "image", "image_id": image_id, "query": image_query}
                question = image_query.get("question", "")
            elif as_choice:
                payload = {"kind": "choice", "option": text or ""}
                question = (text or "").strip()
            else:
                payload = {"kind": "text", "text": text or ""}
                question = (text or "").strip()
            self._append(session_id, "user", payload)

            if phase == HANDED_OFF:
                with self.queue_changed:
                    self.queue_changed.notify_all()
                return []  # the assigned agent replies

            if not question:
                return [self._append(session_id, "system", {
                    "kind": "text",
                    "text": "Please enter a question or upload a screenshot.",
                })]

            if phase == DISAMBIGUATING:
                return self._disambiguating_turn(session_id, question, model, index)
            if phase == AUTOMATON_PENDING:
                return self._automaton_turn(session_id, question)
            return self._answer_question(session_id, question, model, index)

    def _answer_question(
        self,
        session_id: str,
        question: str,
        model: classify.Model | None,
        index: retrieval.Index | None,
    ) -> list[dict]:
        cfg = self.config.orchestrator
        self.store.set_session(
            session_id,
            active_question=question,
            graph=None,
            bucket=None,
            pending_options=[],
            clarify_count=0,
        )
        if model is None:
            return self._search(session_id, question, index)

        result = classify.predict(model, question, k=cfg.top_k)
        self.store.set_session(
            session_id, candidates=[p.to_dict() for p in result.predictions]
        )
        top = result.top
        if result.no_signal or top.confidence < cfg.theta_disambig:
            return self._search(session_id, question, index)
        if top.confidence >= cfg.theta_answer:
            return self._show_answer(session_id, top.class_id)

        candidates = []
        for pred in result.predictions:
            try:
                unit = self.store.get_answer_unit(pred.class_id)
            except UnknownIdError:
                continue
            candidates.append((unit.id, unit.primary_question))
        try:
            graph = disambig.build_graph(candidates, self.lexicon)
        except disambig.DisambiguationError:
            return self._search(session_id, question, index)
        bucket = disambig.best_bucket(graph, lexicon=self.lexicon)
        if bucket is None:
            return self._search(session_id, question, index)
        return self._ask_clarifier(session_id, graph, bucket, clarify_count=1)

    def _ask_clarifier(
        self,
        session_id: str,
        graph: disambig.ConceptGraph,
        bucket: disambig.ConceptBucket,
        clarify_count: int,
    ) -> list[dict]:
        clarifier = disambig.render_question(bucket, self.lexicon)
        self.store.set_session(
            session_id,
            phase=DISAMBIGUATING,
            graph=disambig.graph_to_dict(graph),
            bucket=disambig.bucket_to_dict(bucket),
            pending_options=list(clarifier.options),
            clarify_count=clarify_count,
        )
        return [
            self._append(
                session_id,
                "system",
                {
                    "kind": "clarify",
                    "text": clarifier.text,
                    "options": list(clarifier.options),
                },
            )
        ]

    def _disambiguating_turn(
        self,
        session_id: str,
        reply: str,
        model: classify.Model | None,
        index: retrieval.Index | None,
    ) -> list[dict]:
        cfg = self.config.orchestrator
        session = self.store.get_session(session_id)
        bucket = disambig.bucket_from_dict(session["bucket"])
        graph = disambig.graph_from_dict(session["graph"])
        option = disambig.resolve_option(bucket, reply)

        if option is None:
            info = normalize_input(reply, session["pending_options"], None)
            if info["intent"] == "question":
                return self._answer_question(session_id, reply, model, index)
            return [
                self._append(
                    session_id,
                    "system",
                    {
                        "kind": "clarify",
                        "text": "Sorry, I did not catch that. "
                        + disambig.render_question(bucket, self.lexicon).text,
                        "options": session["pending_options"],
                    },
                )
            ]

        narrowed = disambig.narrow(graph, bucket, option)
        remaining = list(narrowed.question_ids)
        if len(remaining) == 1:
            self.store.set_session(
                session_id, graph=None, bucket=None, pending_options=[]
            )
            return self._show_answer(session_id, remaining[0])
        next_bucket = disambig.best_bucket(narrowed, lexicon=self.lexicon)
        if next_bucket is not None and session["clarify_count"] < cfg.max_clarify_turns:
            return self._ask_clarifier(
                session_id, narrowed, next_bucket, session["clarify_count"] + 1
            )
        self.store.set_session(session_id, graph=None, bucket=None, pending_options=[])
        return self._search(session_id, session["active_question"], index)

    def _show_answer(self, session_id: str, unit_id: str) -> list[dict]:
        unit = self.store.get_answer_unit(unit_id)
        turns = [
            self._append(
                session_id,
                "system",
                {
                    "kind": "answer",
                    "unit_id": unit.id,
                    "question": unit.primary_question,
                    "answer_html": unit.answer,
                    "has_automaton": unit.automaton is not None,
                },
            )
        ]
        if unit.automaton is not None:
            self.store.set_session(
                session_id,
                phase=AUTOMATON_PENDING,
                answer_unit_id=unit.id,
                pending_automaton=unit.automaton.to_dict(),
                pending_entity=None,
                graph=None,
                bucket=None,
                pending_options=[],
            )
            turns.append(
                self._append(
                    session_id,
                    "system",
                    {
                        "kind": "consent",
                        "text": f"I can run this for you: {unit.automaton.description}. Shall I proceed?",
                        "automaton_id": unit.automaton.id,
                        "description": unit.automaton.description,
                    },
                )
            )
        else:
            self.store.set_session(
                session_id,
                phase=ANSWER_SHOWN,
                answer_unit_id=unit.id,
                graph=None,
                bucket=None,
                pending_options=[],
                pending_automaton=None,
                pending_entity=None,
            )
        return turns

    def _search(
        self, session_id: str, question: str, index: retrieval.Index | None
    ) -> list[dict]:
        hits = (
            retrieval.query(index, question, k=self.config.orchestrator.search_k)
            if index is not None
            else []
        )
        self.store.set_session(
            session_id, phase=SEARCHING, graph=None, bucket=None, pending_options=[]
        )
        return [
            self._append(
                session_id,
                "system",
                {"kind": "search", "hits": [h.to_dict() for h in hits]},
            )
        ]

    # ----------------------------------------------------------- automaton

    def _automaton_turn(self, session_id: str, reply: str) -> list[dict]:
        session = self.store.get_session(session_id)
        pending_entity = session.get("pending_entity")
        if pending_entity:
            entities = dict(session["entities"])
            entities[pending_entity] = reply.strip()
            self.store.set_session(session_id, entities=entities, pending_entity=None)
            return self._execute_automaton(session_id)
        if _is_affirmative(reply):
            return self._execute_automaton(session_id)
        if _is_negative(reply):
            self.store.set_session(
                session_id,
                phase=ANSWER_SHOWN,
                pending_automaton=None,
                pending_entity=None,
            )
            return [
                self._append(
                    session_id,
                    "system",
                    {"kind": "text", "text": "Okay, I will not run it."},
                )
            ]
        return [
            self._append(
                session_id,
                "system",
                {
                    "kind": "consent",
                    "text": "Please reply yes or no: shall I run the fix?",
                    "automaton_id": session["pending_automaton"]["id"],
                    "description": session["pending_automaton"]["description"],
                },
            )
        ]

    def _execute_automaton(self, session_id: str) -> list[dict]:
        session = self.store.get_session(session_id)
        automaton = AutomatonRef.from_dict(session["pending_automaton"])
        entities = dict(session.get("entities", {}))
        missing = [e for e in automaton.required_entities if not entities.get(e)]
        if missing:
            entity = missing[0]
            self.store.set_session(session_id, pending_entity=entity)
            return [
                self._append(
                    session_id,
                    "system",
                    {
                        "kind": "entity_request",
                        "entity": entity,
                        "text": f"What is your {entity.replace('_', ' ')}?",
                    },
                )
            ]
        command = automaton.command_template.format(**entities)
        exit_code, output = self.adapter(command)
        self.store.set_session(
            session_id,
            phase=ANSWER_SHOWN,
            pending_automaton=None,
            pending_entity=None,
        )
        turns = [
            self._append(
                session_id,
                "system",
                {
                    "kind": "automaton_result",
                    "success": exit_code == 0,
                    "exit_code": exit_code,
                    "output": output,
                },
            )
        ]
        if exit_code != 0:
            turns.append(
                self._append(
                    session_id,
                    "system",
                    {
                        "kind": "text",
                        "text": "That did not work. I can connect you with a support agent.",
                    },
                )
            )
        return turns

    # ----------------------------------------------------- feedback/handoff

    def record_feedback(
        self,
        session_id: str,
        turn_index: int,
        polarity: str,
        target: str | None = None,
    ) -> dict:
        with self._session_lock(session_id):
            session = self.store.get_session(session_id)
            turns = session["turns"]
            if not (0 <= turn_index < len(turns)):
                raise UnknownIdError(f"no turn {turn_index} in session {session_id}")
            payload = turns[turn_index]["payload"]
            if target is None:
                if payload.get("kind") == "answer":
                    target = payload["unit_id"]
                elif payload.get("kind") == "search" and payload["hits"]:
                    target = payload["hits"][0]["chunk_id"]
            if target is None:
                raise ValidationError("feedback target could not be inferred; pass one")
            event = self.store.record_feedback(
                FeedbackEvent(
                    session_id=session_id,
                    turn_index=turn_index,
                    target=target,
                    polarity=polarity,
                )
            )
            harvested = None
            if polarity == "positive" and self.store.has_chunk(target):
                harvested = self.harvester.on_search_feedback(
                    session["active_question"], target, polarity
                )
            handed_off = False
            if polarity == "negative" and self.config.orchestrator.handoff_on_negative:
                self._handoff_locked(session_id)
                handed_off = True
            return {
                "event": event.to_dict(),
                "harvest_candidate": harvested,
                "handed_off": handed_off,
            }

    def handoff(self, session_id: str) -> dict:
        with self._session_lock(session_id):
            return self._handoff_locked(session_id)

    def _handoff_locked(self, session_id: str) -> dict:
        session = self.store.get_session(session_id)
        if session["phase"] != HANDED_OFF:
            self.store.set_session(session_id, phase=HANDED_OFF)
            self._append(
                session_id,
                "system",
                {"kind": "handoff", "text": "Connecting you with a support agent."},
            )
            with self.queue_changed:
                self.queue_changed.notify_all()
        return self.queue_entry(session_id)

    def queue_entry(self, session_id: str) -> dict:
        session = self.store.get_session(session_id)
        return {
            "session_id": session["id"],
            "question": session.get("active_question", ""),
            "turn_count": len(session["turns"]),
            "assigned_agent": session.get("assigned_agent"),
        }

    def agent_queue(self) -> list[dict]:
        return [
            self.queue_entry(s["id"])
            for s in self.store.sessions()
            if s["phase"] == HANDED_OFF
        ]

    def agent_message(self, session_id: str, text: str, agent: str = "agent") -> dict:
        with self._session_lock(session_id):
            session = self.store.get_session(session_id)
            if session["phase"] == CLOSED:
                raise SessionClosedError(f"session {session_id} is closed")
            if session.get("assigned_agent") != agent:
                self.store.set_session(session_id, assigned_agent=agent)
            turn = self._append(session_id, "agent", {"kind": "text", "text": text})
            return turn

    def close_session(self, session_id: str) -> None:
        with self._session_lock(session_id):
            session = self.store.get_session(session_id)
            if session["phase"] == HANDED_OFF:
                self.harvester.on_agent_conversation(session)
            self.store.set_session(session_id, phase=CLOSED)
