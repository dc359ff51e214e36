"""HTTP+JSON gateway: sessions, ingestion, training, review, and agent
operations. The console is just another client of these endpoints.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path

from fastapi import Depends, FastAPI, Header, Request, UploadFile
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import classify, vision
from .config import AppConfig, load_config
from .harvest import ReviewError
from .ingest import (
    TimedWord,
    chunk_document,
    markdown_to_html,
    mine_incidents,
    segment_transcript,
)
from .ingest.incidents import IncidentRecord
from .orchestrate import Engine, SessionClosedError
from .qagen import build_glossary
from .store import (
    AnswerUnit,
    CorruptLogError,
    DuplicatePrimaryQuestionError,
    Store,
    UnknownIdError,
    ValidationError,
)
from .text import STOPWORDS, tokenize


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


class MessageIn(BaseModel):
    text: str | None = None
    option: str | None = None
    image_id: str | None = None
    client_token: str | None = None


class FeedbackIn(BaseModel):
    turn_index: int
    polarity: str
    target: str | None = None


class ReviewIn(BaseModel):
    decision: str
    reviewer: str = "agent"
    edited_question: str | None = None
    edited_answer: str | None = None


class AgentMessageIn(BaseModel):
    text: str
    agent: str = "agent"


class DocumentIn(BaseModel):
    source_id: str
    content: str
    format: str = "html"  # html | markdown | text


class DocumentsIn(BaseModel):
    documents: list[DocumentIn]


class TranscriptWordIn(BaseModel):
    word: str
    start: float
    end: float


class TranscriptIn(BaseModel):
    source_id: str
    words: list[TranscriptWordIn]


class IncidentIn(BaseModel):
    id: str
    problem: str
    resolution: str = ""


class IncidentsIn(BaseModel):
    incidents: list[IncidentIn]


class UnitIn(BaseModel):
    id: str = ""
    primary_question: str
    answer: str
    alternate_questions: list[str] = []
    source: str = "curated"


class TrainIn(BaseModel):
    epochs: int | None = None
    seed: int | None = None


class Service:
    """Owns the store and engine; request handlers are thin wrappers."""

    def __init__(
        self,
        data_dir: str | Path,
        config: AppConfig | None = None,
        ocr_engine: vision.FakeOcrEngine | None = None,
        app_model: classify.Model | None = None,
    ):
        self.config = config or AppConfig.default()
        self.store = Store(data_dir)
        self.engine = Engine(self.store, self.config)
        self.ocr_engine = ocr_engine
        self.app_model = app_model
        self.data_dir = Path(data_dir)
        (self.data_dir / "images").mkdir(exist_ok=True)
        self._message_cache: dict[tuple[str, str], dict] = {}
        self._cache_lock = threading.Lock()
        self.warm_start()

    def warm_start(self) -> None:
        if len(self.store.answer_units()) >= 2:
            self.engine.train_model()
        if self.store.chunks():
            self.engine.rebuild_index()

    def ocr_vocabulary(self) -> set[str]:
        vocab = set(self.engine._vocabulary())
        chunks = self.store.chunks()
        if chunks:
            vocab |= build_glossary(chunks, top_m=self.config.glossary_top_m).unigrams()
            for chunk in chunks:
                vocab.update(t for t in tokenize(chunk.body) if t not in STOPWORDS and t.isalpha())
        return vocab


def create_app(
    data_dir: str | Path,
    config: AppConfig | None = None,
    ocr_engine=None,
    app_model: classify.Model | None = None,
) -> FastAPI:
    service = Service(data_dir, config, ocr_engine, app_model)
    app = FastAPI(title="deskwise gateway")
    app.state.service = service

    def agent_auth(x_agent_token: str = Header(default="")) -> str:
        if x_agent_token != service.config.agent_token:
            raise ApiError(401, "bad_token", "agent token rejected")
        return x_agent_token

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    def _translate(exc: Exception) -> ApiError:
        if isinstance(exc, UnknownIdError):
            return ApiError(404, "not_found", str(exc))
        if isinstance(exc, SessionClosedError):
            return ApiError(409, "session_closed", str(exc))
        if isinstance(exc, (ReviewError, DuplicatePrimaryQuestionError)):
            return ApiError(409, "conflict", str(exc))
        if isinstance(exc, (ValidationError, ValueError)):
            return ApiError(400, "invalid", str(exc))
        raise exc

    # ------------------------------------------------------------- sessions

    @app.post("/sessions", status_code=201)
    def create_session():
        session = service.engine.create_session()
        return {"session_id": session["id"], "phase": session["phase"]}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return service.store.get_session(session_id)
        except Exception as exc:
            raise _translate(exc)

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageIn):
        if body.client_token:
            with service._cache_lock:
                cached = service._message_cache.get((session_id, body.client_token))
            if cached is not None:
                return cached
        try:
            if body.image_id:
                turns = _image_turn(service, session_id, body.image_id)
            elif body.option is not None:
                turns = service.engine.handle_turn(
                    session_id, text=body.option, as_choice=True
                )
            else:
                turns = service.engine.handle_turn(session_id, text=body.text or "")
            session = service.store.get_session(session_id)
        except Exception as exc:
            raise _translate(exc)
        response = {
            "session_id": session_id,
            "phase": session["phase"],
            "turns": turns,
            "options": session.get("pending_options", []),
            "turn_count": len(session["turns"]),
        }
        if body.client_token:
            with service._cache_lock:
                service._message_cache[(session_id, body.client_token)] = response
        return response

    @app.post("/sessions/{session_id}/feedback")
    def post_feedback(session_id: str, body: FeedbackIn):
        try:
            return service.engine.record_feedback(
                session_id, body.turn_index, body.polarity, body.target
            )
        except Exception as exc:
            raise _translate(exc)

    @app.post("/sessions/{session_id}/handoff")
    def post_handoff(session_id: str):
        try:
            return service.engine.handoff(session_id)
        except Exception as exc:
            raise _translate(exc)

    # ---------------------------------------------------------------- images

    @app.post("/images", status_code=201)
    async def upload_image(file: UploadFile):
        image_id = uuid.uuid4().hex
        suffix = Path(file.filename or "shot.png").suffix or ".png"
        path = service.data_dir / "images" / f"{image_id}{suffix}"
        path.write_bytes(await file.read())
        return {"image_id": f"{image_id}{suffix}"}

    def _image_turn(service: Service, session_id: str, image_id: str) -> list[dict]:
        if service.ocr_engine is None:
            raise ApiError(400, "no_ocr_engine", "no OCR engine is configured")
        path = service.data_dir / "images" / image_id
        if not path.exists():
            raise ApiError(404, "not_found", f"no uploaded image {image_id!r}")
        rgb = vision.load_image(path)
        binary = vision.preprocess(
            rgb,
            sigma1=service.config.sigma1,
            sigma2=service.config.sigma2,
            gain=service.config.dog_gain,
            upscale_factor=service.config.upscale_factor,
        )
        ocr = service.ocr_engine(binary)
        vocabulary = service.ocr_vocabulary() or {"error"}
        model = service.app_model or service.engine.model
        if model is not None:
            query = vision.route_screenshot(ocr, model, vocabulary)
            image_query = {
                "question": query.as_question(),
                "application": query.application,
                "error_text": query.error_text,
                "meta": query.meta,
            }
        else:
            corrected = " ".join(
                vision.correct_tokens(line.text, vocabulary) for line in ocr.lines
            )
            image_query = {
                "question": corrected,
                "application": "",
                "error_text": corrected,
                "meta": {},
            }
        return service.engine.handle_turn(
            session_id, image_query=image_query, image_id=image_id
        )

    # ----------------------------------------------------------------- agent

    @app.get("/agent/queue")
    def agent_queue(wait: float = 0, _token: str = Depends(agent_auth)):
        queue = service.engine.agent_queue()
        if not queue and wait > 0:
            with service.engine.queue_changed:
                service.engine.queue_changed.wait(timeout=min(wait, 30.0))
            queue = service.engine.agent_queue()
        return {"queue": queue}

    @app.post("/agent/sessions/{session_id}/messages")
    def agent_message(session_id: str, body: AgentMessageIn, _token: str = Depends(agent_auth)):
        try:
            return service.engine.agent_message(session_id, body.text, body.agent)
        except Exception as exc:
            raise _translate(exc)

    @app.post("/agent/sessions/{session_id}/close")
    def agent_close(session_id: str, _token: str = Depends(agent_auth)):
        try:
            service.engine.close_session(session_id)
            return {"session_id": session_id, "phase": "Closed"}
        except Exception as exc:
            raise _translate(exc)

    # ---------------------------------------------------------------- review

    @app.get("/review/candidates")
    def review_candidates(_token: str = Depends(agent_auth)):
        return {"candidates": service.engine.harvester.pending()}

    @app.post("/review/{candidate_id}")
    def review_candidate(candidate_id: str, body: ReviewIn, _token: str = Depends(agent_auth)):
        try:
            return service.engine.harvester.review(
                candidate_id,
                body.decision,
                body.reviewer,
                edited_question=body.edited_question,
                edited_answer=body.edited_answer,
            )
        except Exception as exc:
            raise _translate(exc)

    # ---------------------------------------------------------------- ingest

    @app.post("/ingest/documents")
    def ingest_documents(body: DocumentsIn):
        added = []
        try:
            for doc in body.documents:
                content = doc.content
                if doc.format == "markdown":
                    content = markdown_to_html(content)
                elif doc.format == "text":
                    from .ingest import induce_structure

                    content = induce_structure(content)
                for chunk in chunk_document(
                    content, doc.source_id, service.config.max_chunk_tokens
                ):
                    service.store.add_chunk(chunk)
                    added.append(chunk.id)
        except Exception as exc:
            raise _translate(exc)
        service.engine.rebuild_index()
        return {"chunks": added}

    @app.post("/ingest/transcripts")
    def ingest_transcript(body: TranscriptIn):
        try:
            words = [TimedWord(w.word, w.start, w.end) for w in body.words]
            chunks = segment_transcript(
                words,
                gap_threshold=service.config.gap_threshold,
                max_chunk_tokens=service.config.max_chunk_tokens,
                source_id=body.source_id,
            )
            for chunk in chunks:
                service.store.add_chunk(chunk)
        except Exception as exc:
            raise _translate(exc)
        service.engine.rebuild_index()
        return {"chunks": [c.id for c in chunks]}

    @app.post("/ingest/incidents")
    def ingest_incidents(body: IncidentsIn):
        try:
            records = [
                IncidentRecord(i.id, i.problem, i.resolution) for i in body.incidents
            ]
            clusters = mine_incidents(records)
            created = []
            for cluster in clusters:
                if cluster.answer is None:
                    continue
                unit_id = service.store.upsert_answer_unit(
                    AnswerUnit(
                        id="",
                        primary_question=cluster.question,
                        answer=cluster.answer,
                        source="mined",
                    )
                )
                created.append(unit_id)
        except DuplicatePrimaryQuestionError as exc:
            raise _translate(exc)
        except Exception as exc:
            raise _translate(exc)
        return {
            "clusters": [
                {
                    "members": list(c.member_ids),
                    "medoid": c.medoid_id,
                    "question": c.question,
                    "needs_curation": c.needs_curation,
                }
                for c in clusters
            ],
            "created_units": created,
        }

    @app.post("/units")
    def put_unit(body: UnitIn):
        try:
            unit_id = service.store.upsert_answer_unit(
                AnswerUnit(
                    id=body.id,
                    primary_question=body.primary_question,
                    answer=body.answer,
                    alternate_questions=tuple(body.alternate_questions),
                    source=body.source,
                )
            )
            return {"unit_id": unit_id}
        except Exception as exc:
            raise _translate(exc)

    # ----------------------------------------------------------------- train

    @app.post("/train")
    def train(body: TrainIn | None = None):
        body = body or TrainIn()
        try:
            model = service.engine.train_model(epochs=body.epochs, seed=body.seed)
        except Exception as exc:
            raise _translate(exc)
        return {
            "classes": len(model.class_ids),
            "snapshot_id": model.snapshot_id,
            "final_objective": model.final_objective,
        }

    # ---------------------------------------------------------------- health

    @app.get("/health")
    def health():
        model = service.engine.model
        index = service.engine.index
        snapshot = service.store.snapshot()
        needs = False
        changed: list[str] = []
        if model is not None:
            needs, changed = classify.needs_retrain(model, snapshot)
        return {
            "status": "ok",
            "store_snapshot": snapshot.id,
            "answer_units": len(snapshot.answer_units),
            "chunks": len(snapshot.chunks),
            "model": None
            if model is None
            else {"classes": len(model.class_ids), "snapshot_id": model.snapshot_id},
            "index": None if index is None else {"chunks": index.n_docs},
            "needs_retrain": needs,
            "changed_units": changed,
        }

    return app


def serve(
    data_dir: str,
    port: int = 8000,
    config_path: str | None = None,
    host: str = "127.0.0.1",
) -> None:
    import uvicorn

    try:
        config = load_config(config_path)
        app = create_app(data_dir, config)
    except CorruptLogError as exc:
        print(f"refusing to start: {exc}")
        raise SystemExit(1)
    uvicorn.run(app, host=host, port=port)
