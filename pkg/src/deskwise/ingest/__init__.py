"""Ingestion: raw documents, timed transcripts, and incident logs in;
Chunks and candidate QA pairs out."""

from .documents import UnparseableDocumentError, chunk_document, induce_structure, markdown_to_html
from .transcripts import TimedWord, UnorderedTranscriptError, segment_transcript
from .incidents import IncidentRecord, MinedCluster, load_incidents_csv, mine_incidents
from .transcripts import load_timed_words

__all__ = [
    "UnparseableDocumentError",
    "chunk_document",
    "induce_structure",
    "markdown_to_html",
    "TimedWord",
    "UnorderedTranscriptError",
    "segment_transcript",
    "IncidentRecord",
    "MinedCluster",
    "load_incidents_csv",
    "load_timed_words",
    "mine_incidents",
]
