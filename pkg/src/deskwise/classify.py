"""Multi-class question classifier: one-vs-rest linear models trained with
hinge loss and L2 regularization by seeded SGD.

Training is deterministic end to end (fixed shuffles, float64 math), so the
same snapshot and seed reproduce a byte-identical model artifact. Features
are L2-normalized term-frequency vectors of word uni+bigrams; the vocabulary
is first-occurrence ordered so adding a class never renumbers existing
features.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .store import StoreSnapshot
from .text import bigrams, tokenize

MODEL_FORMAT_VERSION = 1

DEFAULT_EPOCHS = 50
DEFAULT_LAMBDA = 1e-4
DEFAULT_SEED = 42

# Base SGD step. Small steps from zero initialization stop at a separator of
# near-minimal norm, which keeps margins honest on ambiguous inputs; large
# steps overshoot into confident-everywhere territory.
ETA0 = 0.1


class TrainingError(ValueError):
    pass


def features(text: str) -> list[str]:
    tokens = tokenize(text)
    return tokens + bigrams(tokens)


@dataclass
class TrainingSet:
    classes: dict[str, list[str]]
    snapshot_id: int = 0
    unit_stamps: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_snapshot(cls, snapshot: StoreSnapshot) -> "TrainingSet":
        return cls(
            classes={u.id: u.all_questions() for u in snapshot.answer_units},
            snapshot_id=snapshot.id,
            unit_stamps={u.id: u.updated_at for u in snapshot.answer_units},
        )

    def validate(self) -> None:
        if len(self.classes) < 2:
            raise TrainingError(f"need at least 2 classes, got {len(self.classes)}")
        for class_id, questions in self.classes.items():
            if not questions:
                raise TrainingError(f"class {class_id!r} has no questions")


@dataclass(frozen=True)
class ClassPrediction:
    class_id: str
    raw_margin: float
    confidence: float

    def to_dict(self) -> dict:
        return {
            "class_id": self.class_id,
            "raw_margin": self.raw_margin,
            "confidence": self.confidence,
        }


@dataclass(frozen=True)
class PredictionResult:
    predictions: tuple[ClassPrediction, ...]
    no_signal: bool = False

    @property
    def top(self) -> ClassPrediction:
        return self.predictions[0]


@dataclass
class Model:
    vocabulary: dict[str, int]
    class_ids: list[str]
    weights: np.ndarray          # (classes, features)
    biases: np.ndarray           # (classes,)
    epochs: int
    lambda_: float
    seed: int
    objective_history: list[float]
    snapshot_id: int = 0
    unit_stamps: dict[str, str] = field(default_factory=dict)
    skipped_empty: int = 0

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else 0.0

    def to_dict(self) -> dict:
        return {
            "version": MODEL_FORMAT_VERSION,
            "vocabulary": self.vocabulary,
            "class_ids": self.class_ids,
            "weights": [[float(w) for w in row] for row in self.weights],
            "biases": [float(b) for b in self.biases],
            "epochs": self.epochs,
            "lambda": self.lambda_,
            "seed": self.seed,
            "objective_history": self.objective_history,
            "snapshot_id": self.snapshot_id,
            "unit_stamps": self.unit_stamps,
            "skipped_empty": self.skipped_empty,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "Model":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        if d.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')}")
        return cls(
            vocabulary=d["vocabulary"],
            class_ids=d["class_ids"],
            weights=np.array(d["weights"], dtype=np.float64),
            biases=np.array(d["biases"], dtype=np.float64),
            epochs=d["epochs"],
            lambda_=d["lambda"],
            seed=d["seed"],
            objective_history=d["objective_history"],
            snapshot_id=d["snapshot_id"],
            unit_stamps=d["unit_stamps"],
            skipped_empty=d["skipped_empty"],
        )


def _vectorize(text: str, vocabulary: dict[str, int], dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=np.float64)
    for f in features(text):
        idx = vocabulary.get(f)
        if idx is not None:
            vec[idx] += 1.0
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def train(
    ts: TrainingSet,
    epochs: int = DEFAULT_EPOCHS,
    lambda_: float = DEFAULT_LAMBDA,
    seed: int = DEFAULT_SEED,
) -> Model:
    """Per-class SGD on mean hinge loss + lambda*||w||^2 with a deterministic
    shuffle; the per-epoch objective (averaged over classes) is recorded."""
    ts.validate()

    samples: list[tuple[str, int]] = []  # (question, class index)
    class_ids = list(ts.classes)
    skipped = 0
    vocabulary: dict[str, int] = {}
    for c, class_id in enumerate(class_ids):
        for question in ts.classes[class_id]:
            if not tokenize(question):
                skipped += 1
                continue
            samples.append((question, c))
            for f in features(question):
                if f not in vocabulary:
                    vocabulary[f] = len(vocabulary)
    if not samples:
        raise TrainingError("no usable training questions")

    dim = len(vocabulary)
    n = len(samples)
    x = np.stack([_vectorize(q, vocabulary, dim) for q, _ in samples])
    labels = np.array([c for _, c in samples])

    rng = random.Random(seed)
    orders = []
    for _ in range(epochs):
        order = list(range(n))
        rng.shuffle(order)
        orders.append(order)

    n_classes = len(class_ids)
    weights = np.zeros((n_classes, dim), dtype=np.float64)
    biases = np.zeros(n_classes, dtype=np.float64)
    per_epoch = np.zeros((n_classes, epochs), dtype=np.float64)

    eta0 = ETA0
    for c in range(n_classes):
        y = np.where(labels == c, 1.0, -1.0)
        w = weights[c]
        b = 0.0
        t = 0
        for epoch in range(epochs):
            for i in orders[epoch]:
                eta = eta0 / (1.0 + eta0 * lambda_ * t)
                t += 1
                w *= 1.0 - 2.0 * eta * lambda_
                if y[i] * (x[i] @ w + b) < 1.0:
                    w += eta * y[i] * x[i]
                    b += eta * y[i]
            margins = y * (x @ w + b)
            hinge = np.maximum(0.0, 1.0 - margins).mean()
            per_epoch[c, epoch] = hinge + lambda_ * float(w @ w)
        biases[c] = b

    return Model(
        vocabulary=vocabulary,
        class_ids=class_ids,
        weights=weights,
        biases=biases,
        epochs=epochs,
        lambda_=lambda_,
        seed=seed,
        objective_history=[float(v) for v in per_epoch.mean(axis=0)],
        snapshot_id=ts.snapshot_id,
        unit_stamps=dict(ts.unit_stamps),
        skipped_empty=skipped,
    )


def _softmax(margins: np.ndarray) -> np.ndarray:
    shifted = margins - margins.max()
    e = np.exp(shifted)
    return e / e.sum()


def predict(model: Model, question: str, k: int = 5) -> PredictionResult:
    """Top-k classes by softmax confidence over the raw margins. A question
    with no in-vocabulary tokens gets the bias-only margins and the
    ``no_signal`` flag."""
    vec = _vectorize(question, model.vocabulary, len(model.vocabulary))
    no_signal = not vec.any()
    margins = model.weights @ vec + model.biases
    confidences = _softmax(margins)
    order = sorted(
        range(len(model.class_ids)),
        key=lambda c: (-confidences[c], model.class_ids[c]),
    )
    preds = tuple(
        ClassPrediction(
            class_id=model.class_ids[c],
            raw_margin=float(margins[c]),
            confidence=float(confidences[c]),
        )
        for c in order[:k]
    )
    return PredictionResult(predictions=preds, no_signal=no_signal)


def needs_retrain(model: Model, snapshot: StoreSnapshot) -> tuple[bool, list[str]]:
    """True when any answer unit was added, removed, or edited since the
    model's training snapshot, with the ids that changed."""
    current = {u.id: u.updated_at for u in snapshot.answer_units}
    changed = sorted(
        set(current) ^ set(model.unit_stamps)
        | {
            i
            for i in set(current) & set(model.unit_stamps)
            if current[i] != model.unit_stamps[i]
        }
    )
    return bool(changed), changed
