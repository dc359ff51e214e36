"""Document ingestion: outline parsing, structure induction, chunking.

A structured document (HTML with h1..h6, or Markdown converted to that) is
broken into one chunk per section body, heading path attached. Sections
larger than ``max_chunk_tokens`` split at paragraph boundaries and the parts
get a "(part k)" path element so order stays reconstructible.
"""

from __future__ import annotations

import html as _html
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from ..richtext import plain_text, sanitize
from ..store import Chunk
from ..text import split_sentences, tokenize

DEFAULT_MAX_CHUNK_TOKENS = 512

_HEADING_TAGS = {f"h{i}": i for i in range(1, 7)}
_BLOCK_TAGS = {"p", "ul", "ol", "table", "pre", "blockquote", "div"}


class UnparseableDocumentError(ValueError):
    def __init__(self, byte_offset: int, reason: str):
        super().__init__(f"unparseable document at byte {byte_offset}: {reason}")
        self.byte_offset = byte_offset


@dataclass
class _Section:
    level: int
    heading: str
    blocks: list[str] = field(default_factory=list)


class _OutlineParser(HTMLParser):
    """Splits a document into (level, heading, body blocks) in order."""

    def __init__(self, raw: str):
        super().__init__(convert_charrefs=True)
        self.raw = raw
        self._line_starts = [0]
        for m in re.finditer("\n", raw):
            self._line_starts.append(m.end())
        self.sections: list[_Section] = [_Section(level=0, heading="")]
        self._heading_level: int | None = None
        self._heading_text: list[str] = []
        self._heading_offset = 0
        self._block_tag: str | None = None
        self._block_depth = 0
        self._block_parts: list[str] = []
        self._loose: list[str] = []

    def _offset(self) -> int:
        line, col = self.getpos()
        return self._line_starts[line - 1] + col

    # ------------------------------------------------------------- headings

    def handle_starttag(self, tag, attrs):
        if tag in _HEADING_TAGS:
            if self._heading_level is not None:
                raise UnparseableDocumentError(self._offset(), "nested heading tag")
            self._flush_loose()
            self._flush_block()
            self._heading_level = _HEADING_TAGS[tag]
            self._heading_text = []
            self._heading_offset = self._offset()
            return
        if self._heading_level is not None:
            return  # markup inside a heading contributes text only
        if self._block_tag is None and tag in _BLOCK_TAGS:
            self._flush_loose()
            self._block_tag = tag
            self._block_depth = 1
            self._block_parts = [self.get_starttag_text() or f"<{tag}>"]
        elif self._block_tag is not None:
            if tag == self._block_tag:
                self._block_depth += 1
            self._block_parts.append(self.get_starttag_text() or f"<{tag}>")

    def handle_startendtag(self, tag, attrs):
        if self._block_tag is not None:
            self._block_parts.append(self.get_starttag_text() or f"<{tag}/>")
        elif tag not in _HEADING_TAGS:
            self._loose.append(self.get_starttag_text() or f"<{tag}/>")

    def handle_endtag(self, tag):
        if tag in _HEADING_TAGS:
            if self._heading_level != _HEADING_TAGS[tag]:
                raise UnparseableDocumentError(self._offset(), f"stray </{tag}>")
            heading = " ".join("".join(self._heading_text).split())
            self.sections.append(_Section(level=self._heading_level, heading=heading))
            self._heading_level = None
            return
        if self._heading_level is not None:
            return
        if self._block_tag is not None:
            self._block_parts.append(f"</{tag}>")
            if tag == self._block_tag:
                self._block_depth -= 1
                if self._block_depth == 0:
                    self._flush_block()

    def handle_data(self, data):
        if self._heading_level is not None:
            self._heading_text.append(data)
        elif self._block_tag is not None:
            self._block_parts.append(_html.escape(data))
        elif data.strip():
            self._loose.append(_html.escape(data))

    def _flush_block(self):
        if self._block_tag is not None:
            self.sections[-1].blocks.append("".join(self._block_parts))
            self._block_tag = None
            self._block_parts = []

    def _flush_loose(self):
        text = "".join(self._loose).strip()
        if text:
            self.sections[-1].blocks.append(f"<p>{text}</p>")
        self._loose = []

    def finish(self) -> list[_Section]:
        if self._heading_level is not None:
            raise UnparseableDocumentError(self._heading_offset, "unclosed heading tag")
        self._flush_loose()
        self._flush_block()
        return self.sections


def _heading_paths(sections: list[_Section]) -> list[tuple[str, ...]]:
    """Ancestor headings (own heading last) per section."""
    paths: list[tuple[str, ...]] = []
    stack: list[tuple[int, str]] = []
    for sec in sections:
        if sec.level == 0:
            paths.append(())
            continue
        while stack and stack[-1][0] >= sec.level:
            stack.pop()
        stack.append((sec.level, sec.heading))
        paths.append(tuple(h for _, h in stack))
    return paths


def _split_oversized(block_html: str, max_tokens: int) -> list[str]:
    """Break a single too-large block into plain paragraphs under the limit,
    first at sentence and then at word boundaries."""
    text = plain_text(block_html)
    pieces: list[str] = []
    current: list[str] = []
    count = 0
    for sent in split_sentences(text) or [text]:
        n = len(tokenize(sent))
        if n > max_tokens:
            if current:
                pieces.append(" ".join(current))
                current, count = [], 0
            words = sent.split()
            run: list[str] = []
            run_count = 0
            for w in words:
                wn = len(tokenize(w))
                if run and run_count + wn > max_tokens:
                    pieces.append(" ".join(run))
                    run, run_count = [], 0
                run.append(w)
                run_count += wn
            if run:
                pieces.append(" ".join(run))
        elif count + n > max_tokens and current:
            pieces.append(" ".join(current))
            current, count = [sent], n
        else:
            current.append(sent)
            count += n
    if current:
        pieces.append(" ".join(current))
    return [f"<p>{_html.escape(p)}</p>" for p in pieces if p.strip()]


def chunk_document(
    doc: str,
    source_id: str = "doc",
    max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS,
) -> list[Chunk]:
    """One chunk per section body, split into "(part k)" chunks at paragraph
    boundaries when a section exceeds ``max_chunk_tokens``.

    Raises UnparseableDocumentError (with byte offset) on malformed input.
    """
    nul = doc.find("\x00")
    if nul >= 0:
        raise UnparseableDocumentError(nul, "NUL byte")
    parser = _OutlineParser(doc)
    try:
        parser.feed(doc)
        parser.close()
    except UnparseableDocumentError:
        raise
    except Exception as exc:  # parser-internal failure
        raise UnparseableDocumentError(parser._offset(), str(exc)) from exc
    sections = parser.finish()
    paths = _heading_paths(sections)

    chunks: list[Chunk] = []
    for sec, path in zip(sections, paths):
        blocks = [sanitize(b) for b in sec.blocks]
        blocks = [b for b in blocks if plain_text(b)]
        if not blocks:
            continue
        # greedy paragraph grouping under the token budget
        groups: list[list[str]] = []
        current: list[str] = []
        count = 0
        for block in blocks:
            n = len(tokenize(plain_text(block)))
            if n > max_chunk_tokens:
                if current:
                    groups.append(current)
                    current, count = [], 0
                for piece in _split_oversized(block, max_chunk_tokens):
                    groups.append([piece])
                continue
            if count + n > max_chunk_tokens and current:
                groups.append(current)
                current, count = [], 0
            current.append(block)
            count += n
        if current:
            groups.append(current)

        multi = len(groups) > 1
        for part, group in enumerate(groups, 1):
            body = "".join(group)
            heading_path = path + (f"(part {part})",) if multi else path
            chunks.append(
                Chunk(
                    id=f"{source_id}#{len(chunks):04d}",
                    source_id=source_id,
                    heading_path=heading_path,
                    body=body,
                    token_count=len(tokenize(plain_text(body))),
                )
            )
    return chunks


# ---------------------------------------------------------------- structure

_NUMBERED_RE = re.compile(r"^(\d+(?:\.\d+)*)[.)]?\s+\S")


def _is_all_caps(line: str) -> bool:
    return any(c.isalpha() for c in line) and line == line.upper()


def _is_title_case(line: str) -> bool:
    words = [w for w in line.split() if any(c.isalpha() for c in w)]
    return bool(words) and all(w[0].isupper() for w in words)


def induce_structure(text: str) -> str:
    """Turn flat text into heading-structured HTML via line-shape heuristics:
    a short line (< 8 tokens) that is all-caps, title-case, or numbered like
    "2.1" becomes a heading; everything else becomes paragraphs."""
    out: list[str] = []
    para: list[str] = []

    def flush():
        body = " ".join(para).strip()
        if body:
            out.append(f"<p>{_html.escape(body)}</p>")
        para.clear()

    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line:
            flush()
            continue
        if len(line.split()) < 8 and not line.endswith((".", ",", ";", ":")):
            m = _NUMBERED_RE.match(line)
            if m:
                level = min(6, m.group(1).count(".") + 1)
                flush()
                out.append(f"<h{level}>{_html.escape(line)}</h{level}>")
                continue
            if _is_all_caps(line):
                flush()
                out.append(f"<h1>{_html.escape(line)}</h1>")
                continue
            if _is_title_case(line):
                flush()
                out.append(f"<h2>{_html.escape(line)}</h2>")
                continue
        para.append(line)
    flush()
    return "".join(out)


# ----------------------------------------------------------------- markdown

_MD_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*)$")
_MD_OL_RE = re.compile(r"^\d+[.)]\s+(.*)$")
_MD_UL_RE = re.compile(r"^[-*+]\s+(.*)$")


def _md_inline(text: str) -> str:
    text = _html.escape(text)
    text = re.sub(r"\*\*(.+?)\*\*", r"<b>\1</b>", text)
    text = re.sub(r"\*(.+?)\*", r"<i>\1</i>", text)
    text = re.sub(r"`(.+?)`", r"<code>\1</code>", text)
    return text


def markdown_to_html(md: str) -> str:
    """Small Markdown subset (headings, lists, emphasis, code spans) to the
    HTML that chunk_document accepts."""
    out: list[str] = []
    para: list[str] = []
    list_tag: str | None = None

    def close_list():
        nonlocal list_tag
        if list_tag:
            out.append(f"</{list_tag}>")
            list_tag = None

    def flush_para():
        if para:
            out.append(f"<p>{_md_inline(' '.join(para))}</p>")
            para.clear()

    for raw_line in md.splitlines():
        line = raw_line.rstrip()
        stripped = line.strip()
        if not stripped:
            flush_para()
            close_list()
            continue
        m = _MD_HEADING_RE.match(stripped)
        if m:
            flush_para()
            close_list()
            level = len(m.group(1))
            out.append(f"<h{level}>{_md_inline(m.group(2).strip())}</h{level}>")
            continue
        m = _MD_UL_RE.match(stripped) or _MD_OL_RE.match(stripped)
        if m:
            flush_para()
            tag = "ul" if _MD_UL_RE.match(stripped) else "ol"
            if list_tag != tag:
                close_list()
                out.append(f"<{tag}>")
                list_tag = tag
            out.append(f"<li>{_md_inline(m.group(1))}</li>")
            continue
        close_list()
        para.append(stripped)
    flush_para()
    close_list()
    return "".join(out)
