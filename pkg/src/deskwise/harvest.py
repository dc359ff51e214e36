"""Learning on the job: accumulate candidate QA pairs from search feedback
and agent conversations, weight them by repeated positive signals, and
promote them only through explicit human review.
"""

from __future__ import annotations

import threading
from datetime import datetime, timedelta, timezone
from typing import Callable

from .store import AnswerUnit, Store, UnknownIdError, ValidationError
from .text import fold, tokenize

DEFAULT_W_PROMOTE = 3
REJECT_SUPPRESS_DAYS = 30

ACK_CUES = {"thanks", "thank", "works", "solved", "great", "resolved"}
MIN_AGENT_ANSWER_TOKENS = 10


class ReviewError(ValidationError):
    pass


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class Harvester:
    """Stateless over the store: candidates live there, keyed by the
    case-folded question plus answer source."""

    def __init__(
        self,
        store: Store,
        w_promote: int = DEFAULT_W_PROMOTE,
        clock: Callable[[], datetime] | None = None,
    ):
        self.store = store
        self.w_promote = w_promote
        self._clock = clock or _utcnow
        self._lock = threading.Lock()

    # ------------------------------------------------------------- signals

    def _find(self, question: str, answer_source: str) -> dict | None:
        key = (fold(question), answer_source)
        for cand in self.store.candidates():
            if (fold(cand["question"]), cand["answer_source"]) == key:
                return cand
        return None

    def on_search_feedback(self, question: str, chunk_id: str, polarity: str) -> dict | None:
        """Positive feedback on a search hit accumulates weight on the
        (question, chunk) pair; negatives are ignored for weighting."""
        if not self.store.has_chunk(chunk_id):
            raise UnknownIdError(f"no chunk {chunk_id!r}")
        if polarity != "positive":
            return None
        with self._lock:
            return self._bump(
                question=question,
                answer_source=chunk_id,
                created_from="search_feedback",
                answer_text=None,
            )

    def _bump(
        self,
        question: str,
        answer_source: str,
        created_from: str,
        answer_text: str | None,
    ) -> dict | None:
        now = self._clock().isoformat()
        cand = self._find(question, answer_source)
        if cand is not None and cand["status"] == "rejected":
            decided = datetime.fromisoformat(cand.get("decided_at") or cand["created_at"])
            if self._clock() - decided < timedelta(days=REJECT_SUPPRESS_DAYS):
                return None  # recently rejected pairs stay suppressed
            cand = None
        if cand is None or cand["status"] != "pending":
            cand = {
                "id": "",
                "question": question,
                "answer_source": answer_source,
                "answer_text": answer_text,
                "weight": 0,
                "status": "pending",
                "created_from": created_from,
                "ready_for_review": False,
                "history": [],
                "created_at": now,
                "decided_at": None,
                "reviewer": None,
                "created_unit_id": None,
            }
        cand["weight"] += 1
        cand["history"] = cand["history"] + [{"ts": now, "weight": cand["weight"]}]
        if answer_text and not cand.get("answer_text"):
            cand["answer_text"] = answer_text
        if cand["weight"] >= self.w_promote and cand["status"] == "pending":
            cand["ready_for_review"] = True
        cand["id"] = self.store.put_candidate(cand)
        return self.store.get_candidate(cand["id"])

    # --------------------------------------------------- agent conversations

    def on_agent_conversation(self, session: dict) -> list[dict]:
        """Pair the user's question with the first long agent turn that the
        user later acknowledges; each pairing bumps a candidate."""
        created = []
        current_question = session.get("active_question") or ""
        pending: dict | None = None
        with self._lock:
            for turn in session.get("turns", ()):
                payload = turn.get("payload", {})
                text = payload.get("text", "") if isinstance(payload, dict) else ""
                if turn.get("actor") == "user" and text:
                    tokens = set(tokenize(text))
                    if pending is not None and tokens & ACK_CUES:
                        cand = self._bump(
                            question=current_question,
                            answer_source=f"agent-turn:{session['id']}:{pending['index']}",
                            created_from="agent_conversation",
                            answer_text=pending["text"],
                        )
                        if cand is not None:
                            created.append(cand)
                        pending = None
                    elif text.rstrip().endswith("?"):
                        current_question = text
                elif turn.get("actor") == "agent" and text:
                    if pending is None and len(tokenize(text)) >= MIN_AGENT_ANSWER_TOKENS:
                        pending = {"index": turn["index"], "text": text}
        return created

    # -------------------------------------------------------------- review

    def pending(self) -> list[dict]:
        return [c for c in self.store.candidates() if c["status"] == "pending"]

    def review(
        self,
        candidate_id: str,
        decision: str,
        reviewer: str,
        edited_question: str | None = None,
        edited_answer: str | None = None,
    ) -> dict:
        """approve -> AnswerUnit lands in the store (source=harvested);
        reject keeps the candidate for audit. Pending candidates only."""
        with self._lock:
            cand = self.store.get_candidate(candidate_id)
            if cand["status"] != "pending":
                raise ReviewError(
                    f"candidate {candidate_id!r} already {cand['status']}"
                )
            now = self._clock().isoformat()
            if decision == "reject":
                cand.update(status="rejected", decided_at=now, reviewer=reviewer)
                self.store.put_candidate(cand)
                return cand
            if decision != "approve":
                raise ReviewError(f"unknown decision {decision!r}")

            answer = edited_answer or cand.get("answer_text")
            if not answer and self.store.has_chunk(cand["answer_source"]):
                answer = self.store.get_chunk(cand["answer_source"]).body
            if not answer:
                raise ReviewError("candidate has no answer text; provide an edit")
            unit_id = self.store.upsert_answer_unit(
                AnswerUnit(
                    id="",
                    primary_question=edited_question or cand["question"],
                    answer=answer,
                    source="harvested",
                )
            )
            cand.update(
                status="approved",
                decided_at=now,
                reviewer=reviewer,
                created_unit_id=unit_id,
            )
            self.store.put_candidate(cand)
            return cand
