from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from deskwise.store import (
    AnswerUnit,
    AutomatonRef,
    Chunk,
    CorruptLogError,
    DuplicatePrimaryQuestionError,
    FeedbackEvent,
    Store,
    UnknownIdError,
    ValidationError,
)


def unit(uid="U1", question="How do I reset my password?", answer="<p>Go to the portal.</p>", **kw):
    return AnswerUnit(id=uid, primary_question=question, answer=answer, **kw)


class TestAnswerUnits:
    def test_round_trip_identity(self, store):
        assert store.upsert_answer_unit(unit()) == "U1"
        got = store.get_answer_unit("U1")
        assert got.primary_question == "How do I reset my password?"
        assert got.answer == "<p>Go to the portal.</p>"
        assert store.unit_version("U1") == 1

    def test_duplicate_primary_conflict_names_holder(self, store):
        store.upsert_answer_unit(unit())
        with pytest.raises(DuplicatePrimaryQuestionError) as err:
            store.upsert_answer_unit(unit(uid="U2", question="how do i RESET my password?"))
        assert err.value.conflicting_id == "U1"

    def test_update_bumps_version_and_updated_at(self, store):
        store.upsert_answer_unit(unit())
        store.upsert_answer_unit(unit(answer="<p>New text.</p>"))
        got = store.get_answer_unit("U1")
        assert store.unit_version("U1") == 2
        assert got.answer == "<p>New text.</p>"
        assert got.updated_at > got.created_at

    def test_answer_is_sanitized_on_upsert(self, store):
        store.upsert_answer_unit(unit(answer='<p>ok</p><script>evil()</script>'))
        assert store.get_answer_unit("U1").answer == "<p>ok</p>evil()"

    def test_invariants_rejected(self, store):
        with pytest.raises(ValidationError):
            store.upsert_answer_unit(unit(question="  "))
        with pytest.raises(ValidationError):
            store.upsert_answer_unit(unit(answer=" "))
        with pytest.raises(ValidationError):
            store.upsert_answer_unit(
                unit(alternate_questions=("HOW DO I RESET MY PASSWORD?",))
            )

    def test_automaton_placeholder_invariant(self, store):
        bad = AutomatonRef(
            id="a1", description="d", command_template="run {user_id}", required_entities=()
        )
        with pytest.raises(ValidationError):
            store.upsert_answer_unit(unit(automaton=bad))


class TestAlternateQuestions:
    def test_add_and_idempotence(self, store):
        store.upsert_answer_unit(unit())
        store.add_alternate_question("U1", "password reset steps?")
        store.add_alternate_question("U1", "Password reset STEPS?")
        got = store.get_answer_unit("U1")
        assert got.alternate_questions == ("password reset steps?",)

    def test_unknown_id(self, store):
        with pytest.raises(UnknownIdError):
            store.add_alternate_question("U999", "anything?")


class TestSnapshots:
    def test_snapshot_isolation(self, store):
        store.upsert_answer_unit(unit())
        before = store.snapshot()
        store.upsert_answer_unit(unit(uid="U3", question="Other question?"))
        after = store.snapshot()
        assert {u.id for u in before.answer_units} == {"U1"}
        assert {u.id for u in after.answer_units} == {"U1", "U3"}

    def test_snapshot_ids_non_decreasing_and_stable_without_writes(self, store):
        ids = [store.snapshot().id]
        store.upsert_answer_unit(unit())
        ids.append(store.snapshot().id)
        ids.append(store.snapshot().id)
        assert ids[1] == ids[2]
        assert ids == sorted(ids)

    def test_changed_units_since(self, store):
        store.upsert_answer_unit(unit())
        snap = store.snapshot()
        assert store.changed_answer_units_since(snap.id) == []
        store.add_alternate_question("U1", "alt?")
        assert store.changed_answer_units_since(snap.id) == ["U1"]


class TestChunksAndFeedback:
    def test_chunk_round_trip(self, store):
        cid = store.add_chunk(
            Chunk(id="c1", source_id="doc", body="<p>hello</p>", token_count=1)
        )
        assert store.get_chunk(cid).body == "<p>hello</p>"

    def test_chunk_anchor_invariant(self, store):
        with pytest.raises(ValidationError):
            store.add_chunk(
                Chunk(id="c1", source_id="doc", body="x", time_anchor=(5.0, 5.0))
            )

    def test_feedback_requires_existing_target(self, store):
        with pytest.raises(UnknownIdError):
            store.record_feedback(
                FeedbackEvent(session_id="s", turn_index=0, target="ghost", polarity="positive")
            )
        store.upsert_answer_unit(unit())
        event = store.record_feedback(
            FeedbackEvent(session_id="s", turn_index=0, target="U1", polarity="positive")
        )
        assert event.timestamp


class TestPersistence:
    def test_reopen_restores_state(self, tmp_path):
        with Store(tmp_path / "d") as store:
            store.upsert_answer_unit(unit())
            store.add_alternate_question("U1", "alt?")
            expected = store.state_dict()
        with Store(tmp_path / "d") as reopened:
            assert reopened.state_dict() == expected

    def test_snapshot_file_plus_tail_replay(self, tmp_path):
        with Store(tmp_path / "d") as store:
            store.upsert_answer_unit(unit())
            store.write_snapshot_file()
            store.upsert_answer_unit(unit(uid="U2", question="Second?"))
            expected = store.state_dict()
        with Store(tmp_path / "d") as reopened:
            assert reopened.state_dict() == expected

    def test_corrupt_log_names_line(self, tmp_path):
        with Store(tmp_path / "d") as store:
            store.upsert_answer_unit(unit())
        log = tmp_path / "d" / "log.jsonl"
        log.write_text(log.read_text() + "{not json\n")
        with pytest.raises(CorruptLogError) as err:
            Store(tmp_path / "d")
        assert err.value.line_number == 2


class TestSessions:
    def test_turn_indices_contiguous(self, store):
        sid = store.create_session({"id": "s1", "phase": "AwaitingQuestion"})
        store.append_turn(sid, {"index": 0, "actor": "user", "payload": {}})
        with pytest.raises(ValidationError):
            store.append_turn(sid, {"index": 5, "actor": "user", "payload": {}})

    def test_set_session_cannot_clobber_turns(self, store):
        sid = store.create_session({"id": "s1", "phase": "AwaitingQuestion"})
        with pytest.raises(ValidationError):
            store.set_session(sid, turns=[])


_OPS = st.lists(
    st.one_of(
        st.tuples(st.just("unit"), st.integers(0, 5), st.text("abcdef ?", min_size=1, max_size=12)),
        st.tuples(st.just("alt"), st.integers(0, 5), st.text("ghijk ?", min_size=1, max_size=12)),
        st.tuples(st.just("chunk"), st.integers(0, 5), st.text("lmnop", min_size=1, max_size=12)),
        st.tuples(st.just("feedback"), st.integers(0, 5), st.just("")),
    ),
    max_size=40,
)


@settings(max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture], deadline=None)
@given(ops=_OPS)
def test_replay_reproduces_live_state(tmp_path_factory, ops):
    """Crash-safety: replaying the log from empty equals the live state."""
    data_dir = tmp_path_factory.mktemp("replay")
    with Store(data_dir) as live:
        for kind, n, text in ops:
            try:
                if kind == "unit":
                    live.upsert_answer_unit(unit(uid=f"U{n}", question=f"q {n} {text}?", answer=f"<p>{text}</p>"))
                elif kind == "alt":
                    live.add_alternate_question(f"U{n}", f"alt {text}?")
                elif kind == "chunk":
                    live.add_chunk(Chunk(id=f"c{n}", source_id="s", body=text, token_count=1))
                elif kind == "feedback":
                    live.record_feedback(
                        FeedbackEvent(session_id="s", turn_index=0, target=f"U{n}", polarity="positive")
                    )
            except (ValidationError, UnknownIdError, DuplicatePrimaryQuestionError):
                pass
        expected = live.state_dict()
    with Store(data_dir) as replayed:
        assert replayed.state_dict() == expected
