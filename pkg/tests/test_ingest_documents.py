from __future__ import annotations

import pytest

from deskwise.ingest import (
    UnparseableDocumentError,
    chunk_document,
    induce_structure,
    markdown_to_html,
)
from deskwise.richtext import plain_text
from deskwise.text import tokenize


class TestChunkDocument:
    def test_nested_sections_become_chunks_with_paths(self):
        doc = (
            "<h1>Cards</h1>"
            "<h2>Credit</h2><p>body A</p>"
            "<h2>Debit</h2><p>body B</p>"
        )
        chunks = chunk_document(doc, "cards")
        assert [c.heading_path for c in chunks] == [("Cards", "Credit"), ("Cards", "Debit")]
        assert [plain_text(c.body) for c in chunks] == ["body A", "body B"]

    def test_empty_document(self):
        assert chunk_document("") == []
        assert chunk_document("<h1>Only heading</h1>") == []

    def test_preamble_before_first_heading_kept(self):
        chunks = chunk_document("<p>intro</p><h1>A</h1><p>body</p>", "d")
        assert [c.heading_path for c in chunks] == [(), ("A",)]

    def test_oversized_section_split_at_paragraphs_reconstructs(self):
        # oracle: token arithmetic and string re-concatenation
        paras = [f"<p>{' '.join(f'word{i}t{j}' for j in range(100))}</p>" for i in range(12)]
        doc = "<h1>Big</h1>" + "".join(paras)  # 1200 tokens, max 512
        chunks = chunk_document(doc, "big", max_chunk_tokens=512)
        assert len(chunks) == 3
        assert [c.heading_path for c in chunks] == [
            ("Big", "(part 1)"),
            ("Big", "(part 2)"),
            ("Big", "(part 3)"),
        ]
        reconstructed = " ".join(plain_text(c.body) for c in chunks)
        assert reconstructed == plain_text("".join(paras))
        assert all(c.token_count <= 512 for c in chunks)
        assert [c.token_count for c in chunks] == [500, 500, 200]

    def test_single_giant_paragraph_still_respects_budget(self):
        body = " ".join(f"tok{i}" for i in range(1200))
        chunks = chunk_document(f"<h1>A</h1><p>{body}</p>", "d", max_chunk_tokens=512)
        assert all(c.token_count <= 512 for c in chunks)
        assert " ".join(plain_text(c.body) for c in chunks) == body

    def test_document_order_preserved(self):
        doc = "<h1>A</h1><p>one</p><h2>B</h2><p>two</p><h1>C</h1><p>three</p>"
        chunks = chunk_document(doc, "d")
        assert [plain_text(c.body) for c in chunks] == ["one", "two", "three"]
        assert chunks[2].heading_path == ("C",)

    def test_disallowed_markup_stripped_but_text_kept(self):
        chunks = chunk_document("<h1>A</h1><p>keep <span>span text</span></p>", "d")
        assert plain_text(chunks[0].body) == "keep span text"
        assert "<span>" not in chunks[0].body

    def test_nested_heading_is_unparseable_with_offset(self):
        doc = "<h1>ok</h1><p>x</p><h2>bad <h3>inner</h3></h2>"
        with pytest.raises(UnparseableDocumentError) as err:
            chunk_document(doc, "d")
        assert err.value.byte_offset == doc.index("<h3>")

    def test_unclosed_heading_is_unparseable(self):
        with pytest.raises(UnparseableDocumentError):
            chunk_document("<h1>never closed<p>body</p>", "d")

    def test_nul_byte_rejected_with_offset(self):
        with pytest.raises(UnparseableDocumentError) as err:
            chunk_document("ab\x00cd", "d")
        assert err.value.byte_offset == 2


class TestInduceStructure:
    def test_all_caps_line_becomes_h1(self):
        html = induce_structure("INSTALLATION\nstep text goes here")
        chunks = chunk_document(html, "d")
        assert chunks[0].heading_path == ("INSTALLATION",)
        assert plain_text(chunks[0].body) == "step text goes here"

    def test_no_heading_like_lines_single_chunk(self):
        html = induce_structure("just some flowing text\nwith more text here that continues.")
        chunks = chunk_document(html, "d")
        assert len(chunks) == 1
        assert chunks[0].heading_path == ()

    def test_numbered_headings_in_order(self):
        html = induce_structure("1. Intro\nfirst body\n2. Setup\nsecond body")
        chunks = chunk_document(html, "d")
        assert [c.heading_path for c in chunks] == [("1. Intro",), ("2. Setup",)]

    def test_numbered_subsection_level(self):
        html = induce_structure("2.1 Deep Dive\nbody")
        assert html.startswith("<h2>")

    def test_title_case_heading(self):
        html = induce_structure("Getting Started\nbody text follows here.")
        assert html.startswith("<h2>Getting Started</h2>")


class TestMarkdown:
    def test_headings_lists_and_emphasis(self):
        md = "# Cards\n\nIntro para with **bold** and `code`.\n\n- one\n- two\n\n## Credit\n\nbody"
        html = markdown_to_html(md)
        assert "<h1>Cards</h1>" in html
        assert "<b>bold</b>" in html and "<code>code</code>" in html
        assert "<ul><li>one</li><li>two</li></ul>" in html
        chunks = chunk_document(html, "d")
        assert chunks[-1].heading_path == ("Cards", "Credit")

    def test_ordered_list(self):
        assert "<ol><li>first</li></ol>" in markdown_to_html("1. first")


def test_bodies_concatenate_to_source_text():
    doc = "<h1>A</h1><p>alpha beta</p><h2>B</h2><p>gamma</p><ul><li>delta</li></ul>"
    chunks = chunk_document(doc, "d")
    joined = " ".join(plain_text(c.body) for c in chunks)
    assert tokenize(joined) == tokenize(plain_text(doc.replace("<h1>A</h1>", "").replace("<h2>B</h2>", "")))
