"""Command-line entry points: ingestion jobs, QA generation, classifier
training/eval, and the HTTP gateway."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classify, gateway
from .config import load_config
from .ingest import (
    chunk_document,
    induce_structure,
    load_incidents_csv,
    load_timed_words,
    markdown_to_html,
    mine_incidents,
    segment_transcript,
)
from .qagen import generate_candidates
from .qagen.pipeline import write_candidates
from .store import AnswerUnit, Chunk, Store


def _open_store(args) -> Store:
    return Store(args.data_dir)


def cmd_ingest_docs(args) -> int:
    store = _open_store(args)
    config = load_config(args.config)
    count = 0
    for path in sorted(Path(args.directory).iterdir()):
        if path.suffix.lower() not in {".html", ".htm", ".md", ".markdown", ".txt"}:
            continue
        raw = path.read_text(encoding="utf-8")
        if path.suffix.lower() in {".md", ".markdown"}:
            raw = markdown_to_html(raw)
        elif path.suffix.lower() == ".txt":
            raw = induce_structure(raw)
        for chunk in chunk_document(raw, path.stem, config.max_chunk_tokens):
            store.add_chunk(chunk)
            count += 1
    print(f"ingested {count} chunks from {args.directory}")
    return 0


def cmd_ingest_transcript(args) -> int:
    store = _open_store(args)
    config = load_config(args.config)
    words = load_timed_words(args.file)
    chunks = segment_transcript(
        words,
        gap_threshold=config.gap_threshold,
        max_chunk_tokens=config.max_chunk_tokens,
        source_id=Path(args.file).stem,
    )
    for chunk in chunks:
        store.add_chunk(chunk)
    print(f"ingested {len(chunks)} transcript chunks from {args.file}")
    return 0


def cmd_ingest_incidents(args) -> int:
    store = _open_store(args)
    incidents = load_incidents_csv(args.file)
    clusters = mine_incidents(incidents, sim_threshold=args.sim_threshold)
    created = 0
    for cluster in clusters:
        line = f"cluster of {len(cluster.member_ids)} (medoid {cluster.medoid_id}): {cluster.question!r}"
        if cluster.answer is None:
            print(f"{line} -> needs manual curation")
            continue
        store.upsert_answer_unit(
            AnswerUnit(
                id="",
                primary_question=cluster.question,
                answer=cluster.answer,
                source="mined",
            )
        )
        created += 1
        print(f"{line} -> answer unit created")
    print(f"{len(clusters)} clusters, {created} QA pairs created")
    return 0


def _chunks_for_snapshot(store: Store, data_dir: str, snapshot_id: str) -> list[Chunk]:
    if snapshot_id in ("latest", ""):
        return store.chunks()
    path = Path(data_dir) / "snapshots" / f"{int(snapshot_id):04d}.json"
    state = json.loads(path.read_text(encoding="utf-8"))
    return [Chunk.from_dict(d) for d in state["chunks"].values()]


def cmd_qagen_run(args) -> int:
    store = _open_store(args)
    chunks = _chunks_for_snapshot(store, args.data_dir, args.snapshot)
    if not chunks:
        print("no chunks ingested; nothing to generate", file=sys.stderr)
        return 1
    candidates = generate_candidates(chunks, ratio=args.ratio)
    write_candidates(args.out, candidates)
    print(f"wrote {len(candidates)} question candidates to {args.out}")
    return 0


def cmd_classify_train(args) -> int:
    store = _open_store(args)
    config = load_config(args.config)
    snapshot = store.snapshot()
    ts = classify.TrainingSet.from_snapshot(snapshot)
    model = classify.train(
        ts, epochs=config.epochs, lambda_=config.lambda_, seed=config.seed
    )
    model.save(args.out)
    print(
        f"trained {len(model.class_ids)} classes from snapshot {snapshot.id}; "
        f"final objective {model.final_objective:.6f}; saved to {args.out}"
    )
    return 0


def cmd_classify_eval(args) -> int:
    model = classify.Model.load(args.model)
    total = correct = 0
    for line in Path(args.testfile).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        case = json.loads(line)
        result = classify.predict(model, case["question"], k=1)
        total += 1
        correct += result.top.class_id == case["class_id"]
    if total == 0:
        print("no test cases", file=sys.stderr)
        return 1
    print(f"accuracy {correct}/{total} = {correct / total:.3f}")
    return 0


def cmd_serve(args) -> int:
    gateway.serve(args.data_dir, port=args.port, config_path=args.config, host=args.host)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="deskwise")
    parser.add_argument("--data-dir", default="./deskwise-data")
    parser.add_argument("--config", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="load knowledge into the store")
    ingest_sub = ingest.add_subparsers(dest="source", required=True)
    p = ingest_sub.add_parser("docs")
    p.add_argument("directory")
    p.set_defaults(func=cmd_ingest_docs)
    p = ingest_sub.add_parser("transcript")
    p.add_argument("file")
    p.set_defaults(func=cmd_ingest_transcript)
    p = ingest_sub.add_parser("incidents")
    p.add_argument("file")
    p.add_argument("--sim-threshold", type=float, default=0.6)
    p.set_defaults(func=cmd_ingest_incidents)

    qagen = sub.add_parser("qagen", help="generate question candidates")
    qagen_sub = qagen.add_subparsers(dest="action", required=True)
    p = qagen_sub.add_parser("run")
    p.add_argument("snapshot", nargs="?", default="latest")
    p.add_argument("--ratio", type=float, default=0.10)
    p.add_argument("--out", default="candidates.jsonl")
    p.set_defaults(func=cmd_qagen_run)

    clf = sub.add_parser("classify", help="train or evaluate the classifier")
    clf_sub = clf.add_subparsers(dest="action", required=True)
    p = clf_sub.add_parser("train")
    p.add_argument("--snapshot", default="latest")
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_classify_train)
    p = clf_sub.add_parser("eval")
    p.add_argument("testfile")
    p.add_argument("--model", default="model.json")
    p.set_defaults(func=cmd_classify_eval)

    serve = sub.add_parser("serve", help="run the HTTP gateway")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
