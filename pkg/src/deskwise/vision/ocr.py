"""OCR plug-point, spell post-correction, and screenshot routing.

The OCR engine itself is external. Engines implement a tiny contract:
binary image in, OcrResult out. The subprocess variant writes the image to
a PGM file, invokes the engine command with that path, and reads JSON lines
{"text": str, "box": [x0, y0, x1, y1], "emphasized": bool} from stdout.
"""

from __future__ import annotations

import json
import re
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .. import classify
from ..text import fuzzy_lookup
from .image import GrayImage, write_pgm

ERROR_CUES = {"error", "failed", "invalid", "denied", "exception"}

_ALPHA_RE = re.compile(r"[A-Za-z]+|[^A-Za-z]+")
_META_RE = re.compile(r"^\s*([\w .\-/]+?)\s*:\s*(.+?)\s*$")


class VisionError(Exception):
    pass


@dataclass(frozen=True)
class OcrLine:
    text: str
    box: tuple[int, int, int, int] = (0, 0, 0, 0)
    emphasized: bool = False


@dataclass(frozen=True)
class OcrResult:
    lines: tuple[OcrLine, ...]
    engine_id: str = "unknown"

    def validate_bounds(self, width: int, height: int) -> None:
        for line in self.lines:
            x0, y0, x1, y1 = line.box
            if not (0 <= x0 <= x1 <= width and 0 <= y0 <= y1 <= height):
                raise VisionError(f"box {line.box} outside {width}x{height} image")

    def text(self) -> str:
        return "\n".join(line.text for line in self.lines)


class OcrEngine(Protocol):
    def __call__(self, image: GrayImage) -> OcrResult: ...


class FakeOcrEngine:
    """Returns canned lines; used in tests and offline development."""

    def __init__(self, lines: list[OcrLine] | list[str]):
        self._lines = tuple(
            line if isinstance(line, OcrLine) else OcrLine(text=line) for line in lines
        )

    def __call__(self, image: GrayImage) -> OcrResult:
        return OcrResult(lines=self._lines, engine_id="fake")


class SubprocessOcrEngine:
    def __init__(self, command: list[str], timeout: float = 60.0):
        self.command = list(command)
        self.timeout = timeout

    def __call__(self, image: GrayImage) -> OcrResult:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "frame.pgm"
            write_pgm(image, path)
            proc = subprocess.run(
                [*self.command, str(path)],
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
            if proc.returncode != 0:
                raise VisionError(f"OCR engine failed ({proc.returncode}): {proc.stderr.strip()}")
            lines = []
            for raw in proc.stdout.splitlines():
                if raw.strip():
                    d = json.loads(raw)
                    lines.append(
                        OcrLine(
                            text=d["text"],
                            box=tuple(d.get("box", (0, 0, 0, 0))),
                            emphasized=bool(d.get("emphasized", False)),
                        )
                    )
            return OcrResult(lines=tuple(lines), engine_id=" ".join(self.command))


def correct_tokens(text: str, vocabulary: set[str]) -> str:
    """Replace unknown words by the unique vocabulary word within edit
    distance 2 that shares the first character; ambiguous or distant tokens
    stay untouched. In-vocabulary words are never changed."""
    if not vocabulary:
        raise ValueError("vocabulary must be nonempty")
    out = []
    for piece in _ALPHA_RE.findall(text):
        if not piece[0].isalpha():
            out.append(piece)
            continue
        if piece.lower() in vocabulary:
            out.append(piece)
            continue
        match = fuzzy_lookup(piece, vocabulary)
        if match is None:
            out.append(piece)
        elif piece[0].isupper():
            out.append(match[0].upper() + match[1:])
        else:
            out.append(match)
    return "".join(out)


@dataclass(frozen=True)
class ErrorQuery:
    application: str
    error_text: str
    meta: dict
    corrected_lines: tuple[str, ...]

    def as_question(self) -> str:
        """Free-text form for the orchestrator; the application name rides
        along as a context token."""
        body = self.error_text or " ".join(self.corrected_lines)
        return f"{body} {self.application}".strip()


def route_screenshot(
    ocr: OcrResult,
    model: classify.Model,
    vocabulary: set[str],
) -> ErrorQuery:
    """Classify the source application and pull out the error message and
    key/value meta lines from corrected OCR text."""
    if not ocr.lines or not ocr.text().strip():
        raise VisionError("no text extracted")
    corrected = [correct_tokens(line.text, vocabulary) for line in ocr.lines]
    prediction = classify.predict(model, " ".join(corrected), k=1)
    application = prediction.top.class_id

    error_lines = []
    meta: dict[str, str] = {}
    for line, text in zip(ocr.lines, corrected):
        tokens = {t.lower() for t in re.findall(r"[A-Za-z]+", text)}
        if line.emphasized or tokens & ERROR_CUES:
            error_lines.append(text)
            continue
        m = _META_RE.match(text)
        if m:
            meta[m.group(1)] = m.group(2)
    return ErrorQuery(
        application=application,
        error_text="\n".join(error_lines),
        meta=meta,
        corrected_lines=tuple(corrected),
    )
