"""QA-pair generation from chunks: sentence selection, simplification,
frame extraction, rule-based question formation, quality filtering."""

from .textrank import rank_sentences, textrank_select
from .glossary import Glossary, build_glossary
from .simplify import simplify
from .frames import Frame, extract_frames
from .questions import GeneratedQuestion, filter_questions, form_questions
from .pipeline import generate_candidates

__all__ = [
    "rank_sentences",
    "textrank_select",
    "Glossary",
    "build_glossary",
    "simplify",
    "Frame",
    "extract_frames",
    "GeneratedQuestion",
    "filter_questions",
    "form_questions",
    "generate_candidates",
]
