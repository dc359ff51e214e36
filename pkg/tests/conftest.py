from __future__ import annotations

import pytest

from deskwise.store import AnswerUnit, AutomatonRef, Chunk, Store

CARD_UNITS = [
    ("u-new-debit", "How can I get a new debit card?", "<p>Apply for a new debit card in the portal.</p>"),
    ("u-new-credit", "What is the process to get a new credit card?", "<p>Fill form CC-1 at any branch.</p>"),
    ("u-dup-debit", "I want a duplicate debit card", "<p>Visit a branch with your id.</p>"),
    ("u-dup-credit", "How do I get a duplicate credit card?", "<p>Call the card hotline.</p>"),
]


@pytest.fixture
def store(tmp_path) -> Store:
    return Store(tmp_path / "data")


@pytest.fixture
def card_store(store: Store) -> Store:
    for uid, question, answer in CARD_UNITS:
        store.upsert_answer_unit(
            AnswerUnit(id=uid, primary_question=question, answer=answer)
        )
    return store


@pytest.fixture
def password_unit() -> AnswerUnit:
    return AnswerUnit(
        id="u-password",
        primary_question="How do I reset my password?",
        answer="<p>We can reset it for you.</p>",
        automaton=AutomatonRef(
            id="a-password",
            description="reset the password",
            command_template="resetpw {user_id}",
            required_entities=("user_id",),
        ),
    )


def make_chunk(chunk_id: str, body: str, **kwargs) -> Chunk:
    from deskwise.richtext import plain_text
    from deskwise.text import tokenize

    return Chunk(
        id=chunk_id,
        source_id=kwargs.pop("source_id", "test"),
        body=body,
        token_count=len(tokenize(plain_text(body))),
        **kwargs,
    )
