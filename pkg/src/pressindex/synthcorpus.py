"""Deterministic synthetic news corpora for benchmarks and fixtures.

Everything here is a pure function of the seed, so two runs over the same
fixture produce byte-identical stores and indexes. The vocabulary leans on
the default lexicon (inflected forms resolve to lemmas), keeps stopwords in
the raw text, and plants the terms the retrieval trials care about
(kill/out/eliminate, go/gone/government, war+iraq adjacency).
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from datetime import date, timedelta
from email.utils import format_datetime
from datetime import datetime, timezone
from pathlib import Path

from .crawler import FeedSource, PageNotFound, RawPage
from .ids import article_id

_NAMES = [
    "iraq", "baghdad", "london", "paris", "berlin", "tokyo", "delhi", "cairo",
    "moscow", "beijing", "madrid", "rome", "ankara", "lagos", "nairobi",
    "sydney", "toronto", "chicago", "denver", "austin", "mumbai", "karachi",
    "tehran", "kabul", "seoul", "lima", "quito", "oslo", "dublin", "geneva",
]

_TOPIC_LEMMAS = {
    "conflict": ["war", "attack", "kill", "bomb", "soldier", "troop", "battle",
                 "invade", "strike", "weapon", "force", "defend", "destroy"],
    "crime": ["kill", "murder", "arrest", "police", "crime", "steal", "jail",
              "judge", "court", "suspect", "investigate", "charge"],
    "politics": ["election", "vote", "government", "minister", "parliament",
                 "party", "leader", "policy", "campaign", "debate", "resign"],
    "sports": ["win", "lose", "match", "team", "player", "score", "champion",
               "tournament", "coach", "season", "defeat", "goal"],
    "weather": ["flood", "storm", "rain", "evacuate", "damage", "wind",
                "forecast", "warn", "rescue", "river", "coast"],
    "economy": ["market", "economy", "trade", "price", "bank", "growth",
                "profit", "investor", "tax", "budget", "export"],
}

_EXTRA_FORMS = ["go", "went", "gone", "goes", "going", "out", "eliminate",
                "eliminated", "help", "helped", "peace", "hello"]

_FILLER = ["the", "a", "an", "of", "in", "on", "at", "to", "for", "with",
           "and", "but", "after", "before", "during", "from"]


def _forms_by_lemma() -> dict[str, list[str]]:
    from .preprocess import load_default_lexicon

    groups: dict[str, list[str]] = {}
    for form, lemma in load_default_lexicon().mapping.items():
        groups.setdefault(lemma, []).append(form)
    for forms in groups.values():
        forms.sort()
    return groups


@dataclass(frozen=True)
class ArticleSpec:
    uri: str
    title: str
    date_iso: str
    body_sentences: tuple[str, ...]
    plain_text: bool = False

    @property
    def body_text(self) -> str:
        return " ".join(self.body_sentences)


def _sentence(rng: random.Random, words: list[str], n_words: int) -> str:
    parts = []
    for i in range(n_words):
        if i and rng.random() < 0.35:
            parts.append(rng.choice(_FILLER))
        parts.append(rng.choice(words))
    text = " ".join(parts)
    return text[0].upper() + text[1:] + rng.choice([".", ".", ".", "!", "?"])


def make_article_specs(
    n: int,
    seed: int = 7,
    base_uri: str = "http://news.example.com",
    topics: list[str] | None = None,
) -> list[ArticleSpec]:
    rng = random.Random(seed)
    groups = _forms_by_lemma()
    topic_words: dict[str, list[str]] = {}
    for topic, lemmas in _TOPIC_LEMMAS.items():
        words: list[str] = []
        for lemma in lemmas:
            words.extend(groups.get(lemma, [lemma]))
        topic_words[topic] = words
    topic_names = topics or sorted(_TOPIC_LEMMAS)

    start = date(2003, 1, 1)
    specs = []
    for i in range(n):
        topic = topic_names[i % len(topic_names)]
        words = topic_words[topic] + rng.sample(_NAMES, 4) + _EXTRA_FORMS
        title_words = [rng.choice(words) for _ in range(rng.randint(3, 5))]
        title = " ".join(title_words).title()
        n_sents = rng.randint(3, 8)
        sentences = tuple(
            _sentence(rng, words, rng.randint(6, 14)) for _ in range(n_sents)
        )
        # guarantee one war/iraq adjacency for proximity fixtures
        if topic == "conflict" and rng.random() < 0.5:
            sentences = sentences + (f"The iraq war continued near {rng.choice(_NAMES)}.",)
        when = (start + timedelta(days=rng.randint(0, 700))).isoformat()
        specs.append(
            ArticleSpec(
                uri=f"{base_uri}/{topic}/{i}",
                title=title,
                date_iso=when,
                body_sentences=sentences,
                plain_text=(i % 13 == 12),
            )
        )
    return specs


def render_page(spec: ArticleSpec) -> bytes:
    if spec.plain_text:
        return f"{spec.title}\n{spec.body_text}\n".encode("utf-8")
    paragraphs = "".join(f"<p>{s}</p>" for s in spec.body_sentences)
    doc = (
        "<html><head>"
        f"<title>{spec.title}</title>"
        f'<meta name="date" content="{spec.date_iso}"/>'
        "<style>body { color: black; }</style>"
        "</head><body>"
        "<script>var tracker = 'do-not-index';</script>"
        f"{paragraphs}"
        "</body></html>"
    )
    return doc.encode("utf-8")


def _rfc822(date_iso: str) -> str:
    d = date.fromisoformat(date_iso)
    return format_datetime(datetime(d.year, d.month, d.day, 12, 0, tzinfo=timezone.utc))


def render_feed(entries: list[ArticleSpec], title: str) -> bytes:
    items = "".join(
        "<item>"
        f"<title>{e.title}</title>"
        f"<link>{e.uri}</link>"
        f"<pubDate>{_rfc822(e.date_iso)}</pubDate>"
        "</item>"
        for e in entries
    )
    return (
        '<?xml version="1.0" encoding="UTF-8"?>'
        f"<rss><channel><title>{title}</title>{items}</channel></rss>"
    ).encode("utf-8")


def write_fixture_site(
    root: Path, n_feeds: int, links_per_feed: int, seed: int = 7
) -> list[Path]:
    """Materialize pages and feed files on disk, addressed by file:// URIs.

    Returns the feed paths in order.
    """
    root = Path(root)
    pages_dir = root / "pages"
    feeds_dir = root / "feeds"
    pages_dir.mkdir(parents=True, exist_ok=True)
    feeds_dir.mkdir(parents=True, exist_ok=True)
    specs = make_article_specs(n_feeds * links_per_feed, seed=seed, base_uri="placeholder")
    on_disk: list[ArticleSpec] = []
    for i, spec in enumerate(specs):
        ext = "txt" if spec.plain_text else "html"
        page_path = pages_dir / f"{i:05d}.{ext}"
        local = ArticleSpec(
            uri=page_path.resolve().as_uri(),
            title=spec.title,
            date_iso=spec.date_iso,
            body_sentences=spec.body_sentences,
            plain_text=spec.plain_text,
        )
        page_path.write_bytes(render_page(local))
        on_disk.append(local)
    feed_paths = []
    for j, chunk_start in enumerate(range(0, len(on_disk), links_per_feed)):
        chunk = on_disk[chunk_start : chunk_start + links_per_feed]
        path = feeds_dir / f"feed-{j:03d}.xml"
        path.write_bytes(render_feed(chunk, title=f"feed {j}"))
        feed_paths.append(path)
    return feed_paths


def make_feed_sources(
    n_feeds: int,
    links_per_feed: int,
    seed: int = 7,
    base_uri: str = "http://stub.example.com",
) -> tuple[list[FeedSource], dict[str, bytes]]:
    """In-memory feeds plus a page universe for the stub backend."""
    specs = make_article_specs(n_feeds * links_per_feed, seed=seed, base_uri=base_uri)
    pages = {spec.uri: render_page(spec) for spec in specs}
    sources = []
    for j, start in enumerate(range(0, len(specs), links_per_feed)):
        chunk = specs[start : start + links_per_feed]
        sources.append(
            FeedSource(uri=f"{base_uri}/feeds/{j}", raw=render_feed(chunk, f"feed {j}"))
        )
    return sources, pages


class StubBackend:
    """Latency-injected fetch backend over an in-memory page universe."""

    name = "http"

    def __init__(
        self,
        pages: dict[str, bytes],
        latency_ms: float = 0.0,
        per_uri_latency_ms: dict[str, float] | None = None,
    ):
        self.pages = pages
        self.latency_ms = latency_ms
        self.per_uri_latency_ms = per_uri_latency_ms or {}

    def fetch(self, uri: str) -> RawPage:
        delay = self.per_uri_latency_ms.get(uri, self.latency_ms)
        if delay > 0:
            time.sleep(delay / 1000.0)
        body = self.pages.get(uri)
        if body is None:
            raise PageNotFound(uri)
        return RawPage(uri, body, datetime.now(timezone.utc), self.name)


@dataclass
class TokenCorpus:
    """Preprocessed + original views of a synthetic corpus, keyed by id."""

    pre_tokens: dict[str, list[str]]
    original_text: dict[str, str]
    uris: dict[str, str]


def token_corpus(n_docs: int, seed: int = 11) -> TokenCorpus:
    from .preprocess import (
        load_default_lexicon,
        load_default_stoplist,
        preprocess_text,
    )

    stoplist = load_default_stoplist()
    lexicon = load_default_lexicon()
    pre: dict[str, list[str]] = {}
    text: dict[str, str] = {}
    uris: dict[str, str] = {}
    for spec in make_article_specs(n_docs, seed=seed):
        key = article_id(spec.uri)
        full = f"{spec.title} {spec.body_text}"
        pre[key] = list(preprocess_text(full, stoplist, lexicon).tokens)
        text[key] = full
        uris[key] = spec.uri
    return TokenCorpus(pre, text, uris)
