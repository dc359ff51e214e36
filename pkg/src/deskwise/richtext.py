"""Sanitized rich-text subset used for stored answers and chunk bodies.

Allowed tags: p, ul/ol/li, table/tr/td, b/i/code, img (data-URI or relative
src only). Anything else is stripped at ingest, keeping inner text, so
formatting that survives is exactly what the console is prepared to render.
"""

from __future__ import annotations

import html as _html
from html.parser import HTMLParser

ALLOWED_TAGS = {"p", "ul", "ol", "li", "table", "tr", "td", "b", "i", "code", "img"}
_VOID_TAGS = {"img"}


def _img_src_ok(src: str) -> bool:
    s = src.strip().lower()
    if s.startswith("data:"):
        return True
    # relative: no scheme, no protocol-relative, no absolute URL
    return not (s.startswith("//") or ":" in s.split("/", 1)[0].split("?", 1)[0])


class _Sanitizer(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.out: list[str] = []
        self._open: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag not in ALLOWED_TAGS:
            return
        if tag == "img":
            self._emit_img(dict(attrs))
            return
        self.out.append(f"<{tag}>")
        self._open.append(tag)

    def handle_startendtag(self, tag, attrs):
        if tag == "img":
            self._emit_img(dict(attrs))

    def handle_endtag(self, tag):
        if tag in ALLOWED_TAGS and tag not in _VOID_TAGS and tag in self._open:
            # close intervening unbalanced tags up to the match
            while self._open:
                top = self._open.pop()
                self.out.append(f"</{top}>")
                if top == tag:
                    break

    def handle_data(self, data):
        self.out.append(_html.escape(data))

    def _emit_img(self, attrs: dict) -> None:
        src = attrs.get("src") or ""
        if not _img_src_ok(src):
            return
        alt = _html.escape(attrs.get("alt") or "", quote=True)
        self.out.append(f'<img src="{_html.escape(src, quote=True)}" alt="{alt}">')

    def result(self) -> str:
        while self._open:
            self.out.append(f"</{self._open.pop()}>")
        return "".join(self.out)


class _TextExtractor(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []

    def handle_data(self, data):
        self.parts.append(data)

    def handle_starttag(self, tag, attrs):
        if tag in {"p", "li", "tr", "br", "div"}:
            self.parts.append(" ")


def sanitize(markup: str) -> str:
    """Reduce arbitrary HTML to the allowed subset; disallowed tags are
    dropped but their text is kept."""
    s = _Sanitizer()
    s.feed(markup)
    s.close()
    return s.result()


def plain_text(markup: str) -> str:
    """Tag-free text content with collapsed whitespace."""
    t = _TextExtractor()
    t.feed(markup)
    t.close()
    return " ".join("".join(t.parts).split())
