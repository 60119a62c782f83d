"""Bit-exact XML emission and parsing for search results and summaries.

Results schema, no whitespace between elements:

    <results query=".." total="N">
      <article id="1" keywords="t1,t2" title=".." date="..">BODY</article>...
    </results>

``id`` is the 1-based rank and ids must be exactly 1..total in order;
``keywords`` carries the matched query terms. ``&``, ``<``, ``>`` and ``"``
are escaped in attributes and text; strings must be free of C0 control
characters (extraction folds them into whitespace).
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Sequence

from .model import NewsArticle


class XmlSchemaError(ValueError):
    pass


class ContiguityError(XmlSchemaError):
    pass


@dataclass(frozen=True)
class ResultEntry:
    id: int  # 1-based rank
    keywords: tuple[str, ...]
    title: str
    date: str
    body: str


@dataclass(frozen=True)
class ResultsDocument:
    query: str
    total: int
    entries: tuple[ResultEntry, ...]

    def __post_init__(self) -> None:
        if self.total != len(self.entries):
            raise XmlSchemaError("total must equal the number of entries")
        ids = [e.id for e in self.entries]
        if ids != list(range(1, self.total + 1)):
            raise ContiguityError(f"entry ids must be 1..{self.total}, got {ids}")


@dataclass(frozen=True)
class SummaryLine:
    article_id: str
    rank: int
    index: int
    text: str


@dataclass(frozen=True)
class SummaryDocument:
    query: str
    sentences: tuple[SummaryLine, ...]


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def emit_results_xml(doc: ResultsDocument) -> bytes:
    parts = [f'<results query="{_escape(doc.query)}" total="{doc.total}">']
    for entry in doc.entries:
        parts.append(
            f'<article id="{entry.id}" keywords="{_escape(",".join(entry.keywords))}"'
            f' title="{_escape(entry.title)}" date="{_escape(entry.date)}">'
            f"{_escape(entry.body)}</article>"
        )
    parts.append("</results>")
    return "".join(parts).encode("utf-8")


def _require(element: ET.Element, attr: str, where: str) -> str:
    value = element.get(attr)
    if value is None:
        raise XmlSchemaError(f"{where}: missing {attr!r} attribute")
    return value


def parse_results_xml(data: bytes) -> ResultsDocument:
    """Inverse of emit_results_xml: parse(emit(x)) == x for every valid x."""
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmlSchemaError(f"malformed XML: {exc}") from exc
    if root.tag != "results":
        raise XmlSchemaError(f"root element is <{root.tag}>, expected <results>")
    query = _require(root, "query", "results")
    total_raw = _require(root, "total", "results")
    try:
        total = int(total_raw)
    except ValueError as exc:
        raise XmlSchemaError(f"total is not an integer: {total_raw!r}") from exc

    entries = []
    ids = []
    for i, element in enumerate(root):
        where = f"article element {i}"
        if element.tag != "article":
            raise XmlSchemaError(f"{where}: unexpected <{element.tag}>")
        if len(element):
            raise XmlSchemaError(f"{where}: nested elements are not allowed")
        raw_id = _require(element, "id", where)
        try:
            rank = int(raw_id)
        except ValueError as exc:
            raise XmlSchemaError(f"{where}: id is not an integer") from exc
        keywords_raw = _require(element, "keywords", where)
        keywords = tuple(keywords_raw.split(",")) if keywords_raw else ()
        entries.append(
            ResultEntry(
                id=rank,
                keywords=keywords,
                title=_require(element, "title", where),
                date=_require(element, "date", where),
                body=element.text or "",
            )
        )
        ids.append(rank)
    if len(entries) != total:
        raise XmlSchemaError(f"total={total} but {len(entries)} article elements")
    if ids != list(range(1, total + 1)):
        raise ContiguityError(f"article ids must be 1..{total}, got {ids}")
    return ResultsDocument(query=query, total=total, entries=tuple(entries))


def emit_summary_xml(doc: SummaryDocument) -> bytes:
    parts = [f'<summary query="{_escape(doc.query)}" total="{len(doc.sentences)}">']
    for line in doc.sentences:
        parts.append(
            f'<sentence article="{_escape(line.article_id)}" rank="{line.rank}"'
            f' index="{line.index}">{_escape(line.text)}</sentence>'
        )
    parts.append("</summary>")
    return "".join(parts).encode("utf-8")


def parse_summary_xml(data: bytes) -> SummaryDocument:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmlSchemaError(f"malformed XML: {exc}") from exc
    if root.tag != "summary":
        raise XmlSchemaError(f"root element is <{root.tag}>, expected <summary>")
    query = _require(root, "query", "summary")
    total = int(_require(root, "total", "summary"))
    sentences = []
    for i, element in enumerate(root):
        where = f"sentence element {i}"
        if element.tag != "sentence":
            raise XmlSchemaError(f"{where}: unexpected <{element.tag}>")
        sentences.append(
            SummaryLine(
                article_id=_require(element, "article", where),
                rank=int(_require(element, "rank", where)),
                index=int(_require(element, "index", where)),
                text=element.text or "",
            )
        )
    if len(sentences) != total:
        raise XmlSchemaError(f"total={total} but {len(sentences)} sentences")
    return SummaryDocument(query=query, sentences=tuple(sentences))


def emit_article_xml(article: NewsArticle) -> bytes:
    return (
        f'<article id="{_escape(article.id)}" uri="{_escape(article.uri)}"'
        f' title="{_escape(article.title)}" date="{_escape(article.date)}">'
        f"{_escape(article.body)}</article>"
    ).encode("utf-8")


def build_results_document(query: str, fetched: Sequence) -> ResultsDocument:
    """Assemble the document from fetch_ranked output; store misses become
    placeholder entries so the surviving order is undisturbed."""
    entries = []
    for rank, item in enumerate(fetched, start=1):
        if item.article is not None:
            title, date, body = item.article.title, item.article.date, item.article.body
        else:
            title, date, body = f"[unavailable: {item.result.doc_id}]", "", ""
        entries.append(
            ResultEntry(
                id=rank,
                keywords=item.result.matched_terms,
                title=title,
                date=date,
                body=body,
            )
        )
    return ResultsDocument(query=query, total=len(entries), entries=tuple(entries))
