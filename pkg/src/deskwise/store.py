"""Durable knowledge store: answer units, chunks, harvest candidates,
sessions, and feedback.

Persistence is a single append-only JSONL log (one op per line) plus optional
compacted snapshot files under ``snapshots/``. Replaying the log from empty
reproduces the live state exactly; readers work on immutable snapshots while
a single lock serializes writers.
"""

from __future__ import annotations

import json
import string
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Callable

from . import richtext
from .text import fold

LOG_NAME = "log.jsonl"
SNAPSHOT_DIR = "snapshots"

UNIT_SOURCES = {"curated", "mined", "generated", "harvested"}


class StoreError(Exception):
    pass


class ValidationError(StoreError):
    pass


class UnknownIdError(StoreError):
    pass


class DuplicatePrimaryQuestionError(StoreError):
    def __init__(self, question: str, conflicting_id: str):
        super().__init__(
            f"primary question {question!r} already belongs to unit {conflicting_id!r}"
        )
        self.conflicting_id = conflicting_id


class CorruptLogError(StoreError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"log replay failed at line {line_number}: {reason}")
        self.line_number = line_number


@dataclass(frozen=True)
class AutomatonRef:
    """Executable remediation attached to an answer; runs only on consent."""

    id: str
    description: str
    command_template: str
    required_entities: tuple[str, ...] = ()

    def placeholders(self) -> set[str]:
        return {
            name
            for _, name, _, _ in string.Formatter().parse(self.command_template)
            if name
        }

    def validate(self) -> None:
        missing = self.placeholders() - set(self.required_entities)
        if missing:
            raise ValidationError(
                f"command placeholders {sorted(missing)} not in required_entities"
            )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "command_template": self.command_template,
            "required_entities": list(self.required_entities),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AutomatonRef":
        return cls(
            id=d["id"],
            description=d["description"],
            command_template=d["command_template"],
            required_entities=tuple(d.get("required_entities", ())),
        )


@dataclass(frozen=True)
class AnswerUnit:
    """An answer with one primary question and its paraphrases; one
    classifier class per unit."""

    id: str
    primary_question: str
    answer: str
    alternate_questions: tuple[str, ...] = ()
    automaton: AutomatonRef | None = None
    source: str = "curated"
    created_at: str = ""
    updated_at: str = ""

    def validate(self) -> None:
        if not self.primary_question.strip():
            raise ValidationError("primary_question must be nonempty")
        if not self.answer.strip():
            raise ValidationError("answer must be nonempty")
        if self.source not in UNIT_SOURCES:
            raise ValidationError(f"unknown source {self.source!r}")
        folded = fold(self.primary_question)
        for alt in self.alternate_questions:
            if fold(alt) == folded:
                raise ValidationError(
                    f"alternate question duplicates the primary: {alt!r}"
                )
        if self.automaton is not None:
            self.automaton.validate()

    def all_questions(self) -> list[str]:
        return [self.primary_question, *self.alternate_questions]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "primary_question": self.primary_question,
            "alternate_questions": list(self.alternate_questions),
            "answer": self.answer,
            "automaton": self.automaton.to_dict() if self.automaton else None,
            "source": self.source,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnswerUnit":
        auto = d.get("automaton")
        return cls(
            id=d["id"],
            primary_question=d["primary_question"],
            alternate_questions=tuple(d.get("alternate_questions", ())),
            answer=d["answer"],
            automaton=AutomatonRef.from_dict(auto) if auto else None,
            source=d.get("source", "curated"),
            created_at=d.get("created_at", ""),
            updated_at=d.get("updated_at", ""),
        )


@dataclass(frozen=True)
class Chunk:
    """Atomic ingested content unit: a document section or transcript span."""

    id: str
    source_id: str
    body: str
    heading_path: tuple[str, ...] = ()
    time_anchor: tuple[float, float] | None = None
    token_count: int = 0

    def validate(self) -> None:
        if not self.body.strip():
            raise ValidationError("chunk body must be nonempty")
        if self.time_anchor is not None:
            start, end = self.time_anchor
            if not (0 <= start < end):
                raise ValidationError(
                    f"time_anchor must satisfy 0 <= start < end, got {self.time_anchor}"
                )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source_id": self.source_id,
            "heading_path": list(self.heading_path),
            "body": self.body,
            "time_anchor": list(self.time_anchor) if self.time_anchor else None,
            "token_count": self.token_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Chunk":
        anchor = d.get("time_anchor")
        return cls(
            id=d["id"],
            source_id=d["source_id"],
            heading_path=tuple(d.get("heading_path", ())),
            body=d["body"],
            time_anchor=tuple(anchor) if anchor else None,
            token_count=d.get("token_count", 0),
        )


@dataclass(frozen=True)
class FeedbackEvent:
    session_id: str
    turn_index: int
    target: str
    polarity: str
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "turn_index": self.turn_index,
            "target": self.target,
            "polarity": self.polarity,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackEvent":
        return cls(**d)


@dataclass(frozen=True)
class StoreSnapshot:
    """Frozen view of answer units and chunks; id grows with the op log."""

    id: int
    answer_units: tuple[AnswerUnit, ...]
    chunks: tuple[Chunk, ...]

    def unit_by_id(self, unit_id: str) -> AnswerUnit | None:
        for u in self.answer_units:
            if u.id == unit_id:
                return u
        return None


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class Store:
    """Single-writer knowledge store backed by an append-only JSONL log."""

    def __init__(self, data_dir: str | Path, clock: Callable[[], datetime] | None = None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / SNAPSHOT_DIR).mkdir(exist_ok=True)
        self._clock = clock or _utcnow
        self._last_ts: datetime | None = None
        self._lock = threading.RLock()
        self._log_path = self.data_dir / LOG_NAME
        self._log_file = None

        self._seq = 0
        self._units: dict[str, AnswerUnit] = {}
        self._unit_versions: dict[str, int] = {}
        self._unit_changed_seq: dict[str, int] = {}
        self._primary_index: dict[str, str] = {}
        self._chunks: dict[str, Chunk] = {}
        self._feedback: list[FeedbackEvent] = []
        self._candidates: dict[str, dict] = {}
        self._sessions: dict[str, dict] = {}

        self._replay()
        self._log_file = open(self._log_path, "a", encoding="utf-8")

    # ------------------------------------------------------------------ log

    def _now_rfc3339(self) -> str:
        now = self._clock()
        if now.tzinfo is None:
            now = now.replace(tzinfo=timezone.utc)
        if self._last_ts is not None and now <= self._last_ts:
            now = self._last_ts + timedelta(microseconds=1)
        self._last_ts = now
        return now.isoformat()

    def _commit(self, op: str, data: dict) -> int:
        """Append one op to the log and apply it. Caller holds the lock and
        has already validated."""
        ts = self._now_rfc3339()
        record = {"op": op, "ts": ts, "data": data}
        self._log_file.write(json.dumps(record, ensure_ascii=False) + "\n")
        self._log_file.flush()
        self._apply(op, data, ts)
        return self._seq

    def _apply(self, op: str, data: dict, ts: str) -> None:
        self._seq += 1
        if op == "answer_unit.upsert":
            unit = AnswerUnit.from_dict(data)
            prior = self._units.get(unit.id)
            if prior is not None:
                self._primary_index.pop(fold(prior.primary_question), None)
                unit = replace(unit, created_at=prior.created_at, updated_at=ts)
                self._unit_versions[unit.id] = self._unit_versions[unit.id] + 1
            else:
                unit = replace(unit, created_at=ts, updated_at=ts)
                self._unit_versions[unit.id] = 1
            self._units[unit.id] = unit
            self._primary_index[fold(unit.primary_question)] = unit.id
            self._unit_changed_seq[unit.id] = self._seq
        elif op == "answer_unit.add_alternate":
            unit = self._units[data["id"]]
            updated = replace(
                unit,
                alternate_questions=unit.alternate_questions + (data["question"],),
                updated_at=ts,
            )
            self._units[unit.id] = updated
            self._unit_versions[unit.id] += 1
            self._unit_changed_seq[unit.id] = self._seq
        elif op == "chunk.add":
            chunk = Chunk.from_dict(data)
            self._chunks[chunk.id] = chunk
        elif op == "feedback.record":
            self._feedback.append(FeedbackEvent.from_dict({**data, "timestamp": ts}))
        elif op == "candidate.put":
            self._candidates[data["id"]] = data
        elif op == "session.create":
            self._sessions[data["id"]] = {**data, "turns": []}
        elif op == "session.turn":
            self._sessions[data["session_id"]]["turns"].append(data["turn"])
        elif op == "session.set":
            sess = self._sessions[data["session_id"]]
            for k, v in data.items():
                if k != "session_id":
                    sess[k] = v
        else:
            raise ValueError(f"unknown op {op!r}")

    def _replay(self) -> None:
        start_seq = 0
        latest = self._latest_snapshot_file()
        if latest is not None:
            state = json.loads(latest.read_text(encoding="utf-8"))
            self._load_state(state)
            start_seq = self._seq
        if not self._log_path.exists():
            return
        with open(self._log_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                if line_no <= start_seq:
                    continue
                line = line.strip()
                if not line:
                    raise CorruptLogError(line_no, "blank line")
                try:
                    record = json.loads(line)
                    self._apply(record["op"], record["data"], record["ts"])
                except CorruptLogError:
                    raise
                except Exception as exc:
                    raise CorruptLogError(line_no, str(exc)) from exc
        # seq must equal the line count; snapshots shift the base
        self._seq = max(self._seq, start_seq)

    # ------------------------------------------------------------ snapshots

    def _latest_snapshot_file(self) -> Path | None:
        files = sorted((self.data_dir / SNAPSHOT_DIR).glob("*.json"))
        return files[-1] if files else None

    def write_snapshot_file(self) -> Path:
        """Compact the current state into snapshots/NNNN.json."""
        with self._lock:
            path = self.data_dir / SNAPSHOT_DIR / f"{self._seq:04d}.json"
            path.write_text(
                json.dumps(self.state_dict(), ensure_ascii=False, sort_keys=True),
                encoding="utf-8",
            )
            return path

    def state_dict(self) -> dict:
        """Full JSON-able state; replay equality is checked field-for-field
        on this."""
        with self._lock:
            return {
                "seq": self._seq,
                "answer_units": {i: u.to_dict() for i, u in self._units.items()},
                "unit_versions": dict(self._unit_versions),
                "unit_changed_seq": dict(self._unit_changed_seq),
                "chunks": {i: c.to_dict() for i, c in self._chunks.items()},
                "feedback": [f.to_dict() for f in self._feedback],
                "candidates": {i: dict(c) for i, c in self._candidates.items()},
                "sessions": {i: json.loads(json.dumps(s)) for i, s in self._sessions.items()},
            }

    def _load_state(self, state: dict) -> None:
        self._seq = state["seq"]
        self._units = {
            i: AnswerUnit.from_dict(d) for i, d in state["answer_units"].items()
        }
        self._unit_versions = {i: int(v) for i, v in state["unit_versions"].items()}
        self._unit_changed_seq = {
            i: int(v) for i, v in state["unit_changed_seq"].items()
        }
        self._primary_index = {
            fold(u.primary_question): u.id for u in self._units.values()
        }
        self._chunks = {i: Chunk.from_dict(d) for i, d in state["chunks"].items()}
        self._feedback = [FeedbackEvent.from_dict(d) for d in state["feedback"]]
        self._candidates = {i: dict(c) for i, c in state["candidates"].items()}
        self._sessions = {i: dict(s) for i, s in state["sessions"].items()}

    def snapshot(self) -> StoreSnapshot:
        """Immutable view of answer units and chunks. The id is the op
        sequence number, so it only moves forward and repeats while nothing
        was written."""
        with self._lock:
            return StoreSnapshot(
                id=self._seq,
                answer_units=tuple(self._units.values()),
                chunks=tuple(self._chunks.values()),
            )

    # --------------------------------------------------------- answer units

    def upsert_answer_unit(self, unit: AnswerUnit) -> str:
        with self._lock:
            unit_id = unit.id or f"u{self._seq + 1:06d}"
            unit = replace(unit, id=unit_id, answer=richtext.sanitize(unit.answer))
            unit.validate()
            holder = self._primary_index.get(fold(unit.primary_question))
            if holder is not None and holder != unit_id:
                raise DuplicatePrimaryQuestionError(unit.primary_question, holder)
            self._commit("answer_unit.upsert", unit.to_dict())
            return unit_id

    def add_alternate_question(self, unit_id: str, question: str) -> AnswerUnit:
        with self._lock:
            unit = self._require_unit(unit_id)
            if not question.strip():
                raise ValidationError("alternate question must be nonempty")
            folded = fold(question)
            if folded == fold(unit.primary_question):
                raise ValidationError("alternate question duplicates the primary")
            if any(fold(q) == folded for q in unit.alternate_questions):
                return unit  # idempotent
            self._commit(
                "answer_unit.add_alternate", {"id": unit_id, "question": question}
            )
            return self._units[unit_id]

    def get_answer_unit(self, unit_id: str) -> AnswerUnit:
        with self._lock:
            return self._require_unit(unit_id)

    def answer_units(self) -> list[AnswerUnit]:
        with self._lock:
            return list(self._units.values())

    def unit_version(self, unit_id: str) -> int:
        with self._lock:
            self._require_unit(unit_id)
            return self._unit_versions[unit_id]

    def changed_answer_units_since(self, seq: int) -> list[str]:
        with self._lock:
            return sorted(i for i, s in self._unit_changed_seq.items() if s > seq)

    def _require_unit(self, unit_id: str) -> AnswerUnit:
        unit = self._units.get(unit_id)
        if unit is None:
            raise UnknownIdError(f"no answer unit {unit_id!r}")
        return unit

    # --------------------------------------------------------------- chunks

    def add_chunk(self, chunk: Chunk) -> str:
        with self._lock:
            chunk_id = chunk.id or f"c{self._seq + 1:06d}"
            chunk = replace(chunk, id=chunk_id)
            chunk.validate()
            self._commit("chunk.add", chunk.to_dict())
            return chunk_id

    def get_chunk(self, chunk_id: str) -> Chunk:
        with self._lock:
            chunk = self._chunks.get(chunk_id)
            if chunk is None:
                raise UnknownIdError(f"no chunk {chunk_id!r}")
            return chunk

    def has_chunk(self, chunk_id: str) -> bool:
        with self._lock:
            return chunk_id in self._chunks

    def chunks(self) -> list[Chunk]:
        with self._lock:
            return list(self._chunks.values())

    # ------------------------------------------------------------- feedback

    def record_feedback(self, event: FeedbackEvent) -> FeedbackEvent:
        with self._lock:
            if event.polarity not in {"positive", "negative"}:
                raise ValidationError(f"bad polarity {event.polarity!r}")
            if event.target not in self._units and event.target not in self._chunks:
                raise UnknownIdError(f"feedback target {event.target!r} does not exist")
            self._commit("feedback.record", event.to_dict())
            return self._feedback[-1]

    def feedback_events(self) -> list[FeedbackEvent]:
        with self._lock:
            return list(self._feedback)

    # ----------------------------------------------------------- candidates

    def put_candidate(self, candidate: dict) -> str:
        with self._lock:
            cand = dict(candidate)
            cand["id"] = cand.get("id") or f"hc{self._seq + 1:06d}"
            self._commit("candidate.put", cand)
            return cand["id"]

    def get_candidate(self, candidate_id: str) -> dict:
        with self._lock:
            cand = self._candidates.get(candidate_id)
            if cand is None:
                raise UnknownIdError(f"no harvest candidate {candidate_id!r}")
            return dict(cand)

    def candidates(self) -> list[dict]:
        with self._lock:
            return [dict(c) for c in self._candidates.values()]

    # ------------------------------------------------------------- sessions

    def create_session(self, session: dict) -> str:
        with self._lock:
            if not session.get("id"):
                session = {**session, "id": f"s{self._seq + 1:06d}"}
            if session["id"] in self._sessions:
                raise ValidationError(f"session {session['id']!r} already exists")
            self._commit("session.create", session)
            return session["id"]

    def append_turn(self, session_id: str, turn: dict) -> None:
        with self._lock:
            sess = self._require_session(session_id)
            expected = len(sess["turns"])
            if turn.get("index") != expected:
                raise ValidationError(
                    f"turn index {turn.get('index')} != next index {expected}"
                )
            self._commit("session.turn", {"session_id": session_id, "turn": turn})

    def set_session(self, session_id: str, **fields: Any) -> None:
        with self._lock:
            self._require_session(session_id)
            if "turns" in fields or "id" in fields:
                raise ValidationError("turns and id cannot be overwritten")
            self._commit("session.set", {"session_id": session_id, **fields})

    def get_session(self, session_id: str) -> dict:
        with self._lock:
            return json.loads(json.dumps(self._require_session(session_id)))

    def sessions(self) -> list[dict]:
        with self._lock:
            return [json.loads(json.dumps(s)) for s in self._sessions.values()]

    def _require_session(self, session_id: str) -> dict:
        sess = self._sessions.get(session_id)
        if sess is None:
            raise UnknownIdError(f"no session {session_id!r}")
        return sess

    # ---------------------------------------------------------------- misc

    def close(self) -> None:
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
