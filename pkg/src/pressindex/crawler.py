"""Feed parsing, page fetching, article extraction and the parallel crawl.

Feeds use a minimal RSS 2.0 subset: ``rss > channel > item*`` with child
elements ``link`` (required), ``title`` and ``pubDate``. Links are split
across pipeline workers; duplicate URIs across feeds store exactly one
article because ids are a pure function of the canonicalized URI.
"""

from __future__ import annotations

import html
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from email.utils import parsedate_to_datetime
from pathlib import Path
from typing import Protocol, Sequence
from urllib.parse import urlsplit
from urllib.request import url2pathname

from .docstore import StoreError
from .ids import article_id, canonicalize_uri
from .model import NewsArticle, make_article
from .pipeline import JobConfig, JobReport, run_tasks, split_inputs


class FeedParseError(Exception):
    def __init__(self, uri: str, offset: int, message: str):
        super().__init__(f"{uri} @{offset}: {message}")
        self.uri = uri
        self.offset = offset


class FetchError(Exception):
    pass


class PageNotFound(FetchError):
    pass


class FetchTimeout(FetchError):
    pass


class FetchRefused(FetchError):
    pass


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class FeedSource:
    uri: str
    raw: bytes

    @classmethod
    def from_path(cls, path: Path | str) -> "FeedSource":
        p = Path(path)
        return cls(uri=p.as_uri() if p.is_absolute() else str(p), raw=p.read_bytes())


@dataclass(frozen=True)
class FeedEntry:
    link: str
    title: str | None = None
    pub_date: str | None = None


@dataclass(frozen=True)
class ParsedFeed:
    entries: tuple[FeedEntry, ...]
    skipped: int


@dataclass(frozen=True)
class RawPage:
    uri: str
    body: bytes
    fetched_at: datetime
    backend: str


def _byte_offset(raw: bytes, line: int, column: int) -> int:
    # expat positions are (1-based line, 0-based column); exact for the
    # ASCII fixtures this grammar targets
    lines = raw.split(b"\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + column


def parse_feed(feed: FeedSource) -> ParsedFeed:
    """Parse the minimal feed grammar; links come back in document order and
    duplicates are preserved (dedup happens at store time). Items without a
    link are skipped and counted."""
    try:
        root = ET.fromstring(feed.raw)
    except ET.ParseError as exc:
        line, col = exc.position
        raise FeedParseError(feed.uri, _byte_offset(feed.raw, line, col), str(exc)) from exc
    if root.tag != "rss":
        raise FeedParseError(feed.uri, 0, f"root element is <{root.tag}>, expected <rss>")
    channel = root.find("channel")
    if channel is None:
        raise FeedParseError(feed.uri, 0, "missing <channel> element")
    entries: list[FeedEntry] = []
    skipped = 0
    for item in channel.findall("item"):
        link = (item.findtext("link") or "").strip()
        if not link:
            skipped += 1
            continue
        title = item.findtext("title")
        pub = item.findtext("pubDate")
        entries.append(
            FeedEntry(
                link=link,
                title=title.strip() if title else None,
                pub_date=pub.strip() if pub else None,
            )
        )
    return ParsedFeed(tuple(entries), skipped)


class FetchBackend(Protocol):
    name: str

    def fetch(self, uri: str) -> RawPage: ...


class FileBackend:
    """Serves file:// URIs and plain paths; the fixture layout is a directory
    of .html/.txt files."""

    name = "file"

    def fetch(self, uri: str) -> RawPage:
        parts = urlsplit(uri)
        if parts.scheme not in ("", "file"):
            raise FetchError(f"file backend cannot fetch scheme {parts.scheme!r}")
        path = url2pathname(parts.path) if parts.scheme == "file" else uri
        try:
            body = Path(path).read_bytes()
        except FileNotFoundError as exc:
            raise PageNotFound(uri) from exc
        except OSError as exc:
            raise FetchError(f"{uri}: {exc}") from exc
        return RawPage(uri, body, datetime.now(timezone.utc), self.name)


class HttpBackend:
    name = "http"

    def __init__(self, timeout: float = 10.0):
        self.timeout = timeout

    def fetch(self, uri: str) -> RawPage:
        import requests

        if urlsplit(uri).scheme not in ("http", "https"):
            raise FetchError(f"http backend cannot fetch {uri!r}")
        try:
            resp = requests.get(uri, timeout=self.timeout)
        except requests.Timeout as exc:
            raise FetchTimeout(uri) from exc
        except requests.ConnectionError as exc:
            raise FetchRefused(uri) from exc
        if resp.status_code == 404:
            raise PageNotFound(uri)
        if resp.status_code >= 400:
            raise FetchError(f"{uri}: HTTP {resp.status_code}")
        return RawPage(uri, resp.content, datetime.now(timezone.utc), self.name)


_TITLE_RE = re.compile(r"<title[^>]*>(.*?)</title>", re.I | re.S)
_DROP_ELEMENT_RE = re.compile(r"<(script|style|title)\b.*?</\1\s*>", re.I | re.S)
_TAG_RE = re.compile(r"<[^>]*>")
_META_DATE_RE = re.compile(r"<meta\s[^>]*name=[\"']date[\"'][^>]*>", re.I)
_META_CONTENT_RE = re.compile(r"content=[\"']([^\"']*)[\"']", re.I)
# C0 controls fold into the whitespace collapse so emitted XML stays
# well-formed
_WS_RE = re.compile(r"[\s\x00-\x1f]+")


def _collapse(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def normalize_date(value: str | None) -> str | None:
    """Accept RFC-822 (classic feed pubDate) or ISO-8601; give back an
    ISO-8601 date string, or None when unparseable."""
    if not value:
        return None
    value = value.strip()
    try:
        return parsedate_to_datetime(value).date().isoformat()
    except (TypeError, ValueError):
        pass
    try:
        return date.fromisoformat(value[:10]).isoformat()
    except ValueError:
        return None


def extract_article(page: RawPage, pub_date: str | None = None) -> NewsArticle:
    """Turn a fetched page into a NewsArticle.

    Title: content of the first <title> element, else the first non-empty
    line. Body: tags stripped, script/style/title element contents dropped,
    entities unescaped, whitespace runs collapsed. Date: the feed pubDate if
    supplied, else a <meta name="date"> content, else the fetch date.
    """
    text = page.body.decode("utf-8", errors="replace")
    if not text.strip():
        raise ExtractionError(f"{page.uri}: empty page")

    title_match = _TITLE_RE.search(text)
    if title_match:
        title = _collapse(html.unescape(_TAG_RE.sub(" ", title_match.group(1))))
    else:
        title = ""
        for line in text.splitlines():
            candidate = _collapse(html.unescape(_TAG_RE.sub(" ", line)))
            if candidate:
                title = candidate
                break
    if not title:
        raise ExtractionError(f"{page.uri}: no usable title")

    cleaned = _DROP_ELEMENT_RE.sub(" ", text)
    body = _collapse(html.unescape(_TAG_RE.sub(" ", cleaned)))

    when = normalize_date(pub_date)
    if when is None:
        meta = _META_DATE_RE.search(text)
        if meta:
            content = _META_CONTENT_RE.search(meta.group(0))
            if content:
                when = normalize_date(content.group(1))
    if when is None:
        when = page.fetched_at.date().isoformat()

    return make_article(uri=page.uri, title=title, date=when, body=body)


@dataclass
class CrawlReport:
    stored: list[tuple[str, str]] = field(default_factory=list)  # (link, key)
    errored: list[tuple[str, str]] = field(default_factory=list)  # (link, error)
    deduped: list[str] = field(default_factory=list)
    empty_body: list[str] = field(default_factory=list)
    total_links: int = 0
    feed_items_skipped: int = 0
    job: JobReport | None = None


def default_partition_count(n_links: int, job: JobConfig) -> int:
    """Enough partitions for elasticity headroom without drowning in
    per-task overhead."""
    if n_links == 0:
        return 1
    return max(1, min(n_links, job.max_workers * 4))


def crawl_feeds(
    feeds: Sequence[FeedSource],
    job: JobConfig,
    store,
    backend: FetchBackend,
    n_partitions: int | None = None,
) -> CrawlReport:
    """Fetch, extract and store every feed-listed link on the worker pool.

    Fetch and extraction failures are per-link and non-fatal; store failures
    abort the crawl. Re-crawling the same feeds leaves the store
    byte-identical.
    """
    report = CrawlReport()
    unique: list[FeedEntry] = []
    seen: set[str] = set()
    for feed in feeds:
        parsed = parse_feed(feed)
        report.feed_items_skipped += parsed.skipped
        for entry in parsed.entries:
            report.total_links += 1
            key = article_id(entry.link)
            if key in seen:
                report.deduped.append(entry.link)
                continue
            seen.add(key)
            unique.append(entry)

    partitions = split_inputs(unique, n_partitions or default_partition_count(len(unique), job))
    partitions = [p for p in partitions if p]

    def work(entries: list[FeedEntry]) -> list[tuple[str, str, str, bool]]:
        out = []
        for entry in entries:
            try:
                page = backend.fetch(entry.link)
                article = extract_article(page, pub_date=entry.pub_date)
                key = store.put_article(article)
                out.append(("ok", entry.link, key, article.body == ""))
            except (FetchError, ExtractionError) as exc:
                out.append(("err", entry.link, f"{type(exc).__name__}: {exc}", False))
        return out

    results, job_report = run_tasks(job, partitions, work)
    report.job = job_report
    if job_report.failed:
        errors = "; ".join(t.error or "?" for t in job_report.failed)
        raise StoreError(f"crawl aborted, store failures: {errors}")
    for task_id in sorted(results):
        for status, link, detail, empty in results[task_id]:
            if status == "ok":
                report.stored.append((link, detail))
                if empty:
                    report.empty_body.append(detail)
            else:
                report.errored.append((link, detail))
    return report


def load_feed_sources(paths: Sequence[Path | str]) -> list[FeedSource]:
    """Expand files and directories (``*.xml``, sorted) into FeedSources."""
    sources: list[FeedSource] = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            for f in sorted(path.glob("*.xml")):
                sources.append(FeedSource.from_path(f))
        else:
            sources.append(FeedSource.from_path(path))
    return sources
