"""Evaluation harnesses: crawl scaling, normal-vs-expanded precision, and
retrieval timing across index flavors.

Timing assertions downstream are ordinal (method A beats method B), never
absolute milliseconds; the tables themselves are deterministic in structure.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .crawler import crawl_feeds
from .docstore import DocStore
from .indexer import build_original_index, build_preprocessed_index
from .model import NewsArticle, make_article
from .pipeline import JobConfig
from .preprocess import TOKEN_RE, preprocess_text
from .queryengine import QueryEngine, QueryRequest, Thesaurus, wildcard_regex
from .synthcorpus import StubBackend, make_feed_sources, token_corpus

# -- crawl scaling (elastic vs static) ----------------------------------------


@dataclass(frozen=True)
class BenchCrawlRow:
    feeds: int
    links: int
    workers: int
    elastic_wall: float
    baseline_wall: float

    @property
    def ratio(self) -> float:
        return 0.0 if self.baseline_wall == 0 else self.elastic_wall / self.baseline_wall


def _timed_crawl(feeds, job, backend, store_dir: Path) -> float:
    store = DocStore.open(store_dir)
    started = time.perf_counter()
    crawl_feeds(feeds, job, store, backend)
    return time.perf_counter() - started


def bench_crawl(
    feed_counts: Sequence[int],
    workers: int,
    workdir: Path,
    links_per_feed: int = 100,
    latency_ms: float = 50.0,
    seed: int = 7,
) -> list[BenchCrawlRow]:
    """For each feed count, crawl against the latency-injected stub backend
    with the elastic pool at ``workers`` and with the static single-worker
    baseline."""
    rows = []
    workdir = Path(workdir)
    for n_feeds in feed_counts:
        if n_feeds == 0:
            rows.append(BenchCrawlRow(0, 0, workers, 0.0, 0.0))
            continue
        feeds, pages = make_feed_sources(n_feeds, links_per_feed, seed=seed)
        backend = StubBackend(pages, latency_ms=latency_ms)
        elastic_job = JobConfig(
            initial_workers=workers,
            max_workers=max(workers, 2 * workers),
            task_timeout_ms=max(4 * latency_ms, 1.0),
        )
        baseline_job = JobConfig(
            initial_workers=1, max_workers=1, task_timeout_ms=60_000.0
        )
        elastic = _timed_crawl(feeds, elastic_job, backend, workdir / f"elastic-{n_feeds}")
        baseline = _timed_crawl(feeds, baseline_job, backend, workdir / f"baseline-{n_feeds}")
        rows.append(
            BenchCrawlRow(n_feeds, n_feeds * links_per_feed, workers, elastic, baseline)
        )
    return rows


@dataclass(frozen=True)
class StallBenchResult:
    elastic_wall: float
    static_wall: float
    peak_workers: int


def bench_stall(
    workdir: Path,
    n_links: int = 8,
    latency_ms: float = 200.0,
    stall_ms: float = 5_000.0,
    max_workers: int = 4,
    seed: int = 13,
) -> StallBenchResult:
    """One link stalls for ``stall_ms``; the elastic scheduler (1 initial
    worker, growth allowed) races the static single-worker baseline."""
    feeds, pages = make_feed_sources(1, n_links, seed=seed)
    stalled_uri = sorted(pages)[0]
    backend = StubBackend(
        pages, latency_ms=latency_ms, per_uri_latency_ms={stalled_uri: stall_ms}
    )
    workdir = Path(workdir)

    elastic_job = JobConfig(
        initial_workers=1,
        max_workers=max_workers,
        task_timeout_ms=max(2 * latency_ms, 50.0),
    )
    store = DocStore.open(workdir / "elastic")
    started = time.perf_counter()
    report = crawl_feeds(feeds, elastic_job, store, backend, n_partitions=n_links)
    elastic_wall = time.perf_counter() - started

    static_job = JobConfig(initial_workers=1, max_workers=1, task_timeout_ms=60_000.0)
    static_wall = _timed_crawl(feeds, static_job, backend, workdir / "static")
    return StallBenchResult(elastic_wall, static_wall, report.job.peak_workers)


# -- precision: normal vs expanded query ---------------------------------------


@dataclass(frozen=True)
class PrecisionTrial:
    corpus_size: int
    mode: str  # "normal" | "expanded"
    retrieved: int
    relevant_retrieved: int

    @property
    def precision(self) -> float:
        return 0.0 if self.retrieved == 0 else self.relevant_retrieved / self.retrieved


@dataclass
class PrecisionReport:
    query: str
    trials: list[PrecisionTrial] = field(default_factory=list)

    def series(self, mode: str) -> list[float]:
        return [t.precision for t in self.trials if t.mode == mode]


def eval_precision(
    stage_batches: Sequence[Sequence[NewsArticle]],
    query: str,
    labels: Mapping[str, bool],
    resources,
    job: JobConfig | None = None,
) -> PrecisionReport:
    """Grow the corpus stage by stage, rebuilding indexes, and measure
    precision of the query normal and expanded. ``labels`` maps article URI
    (or its basename) to relevance."""
    job = job or JobConfig(initial_workers=2, max_workers=4)
    report = PrecisionReport(query)
    articles: dict[str, NewsArticle] = {}
    tokens: dict[str, list[str]] = {}

    def is_relevant(article: NewsArticle) -> bool:
        if article.uri in labels:
            return labels[article.uri]
        name = article.uri.rsplit("/", 1)[-1]
        return labels.get(name, False)

    for batch in stage_batches:
        for art in batch:
            articles[art.id] = art
            tokens[art.id] = list(
                preprocess_text(
                    f"{art.title} {art.body}", resources.stoplist, resources.lexicon
                ).tokens
            )
        pre, _ = build_preprocessed_index(sorted(tokens), tokens.__getitem__, job)
        orig, _ = build_original_index(sorted(articles), lambda k: articles[k], job)
        engine = QueryEngine(
            pre, orig, resources.lexicon, thesaurus=resources.thesaurus
        )
        for mode, expand in (("normal", False), ("expanded", True)):
            ranked = engine.search(QueryRequest(query, mode="exact", expand=expand))
            relevant = sum(1 for r in ranked if is_relevant(articles[r.doc_id]))
            report.trials.append(
                PrecisionTrial(len(articles), mode, len(ranked), relevant)
            )
    return report


def build_precision_fixture(
    n_stages: int = 5, seed: int = 5
) -> tuple[list[list[NewsArticle]], str, dict[str, bool]]:
    """The staged corpus of the normal-vs-expanded evaluation: on-topic crime
    articles first (query 'kill' hits them), then waves of off-topic sport
    and politics articles that carry only the expansion terms ('out',
    'eliminated')."""
    import random

    rng = random.Random(seed)
    labels: dict[str, bool] = {}
    query = "kill"

    def crime_doc(i: int) -> NewsArticle:
        verb = rng.choice(["killed", "kills", "killed"])
        extra = rng.choice(
            ["Police arrested a suspect.", "The gang eliminated a rival witness.",
             "Officers sealed the district."]
        )
        uri = f"http://fixture.example.com/crime/{i}"
        labels[uri] = True
        return make_article(
            uri=uri,
            title=f"Crime report {i}",
            date="2003-02-01",
            body=f"A man {verb} two people in the city. {extra}",
        )

    def offtopic_doc(stage: int, i: int) -> NewsArticle:
        kind = rng.choice(["cricket", "tennis", "politics"])
        if kind == "cricket":
            body = f"The batsman was out for {rng.randint(10, 99)} runs. The crowd cheered."
        elif kind == "tennis":
            body = f"The champion was eliminated in round {rng.randint(1, 5)}. Fans left early."
        else:
            body = "The minister walked out of the debate. Talks stalled."
        uri = f"http://fixture.example.com/{kind}/{stage}-{i}"
        labels[uri] = False
        return make_article(
            uri=uri, title=f"{kind.title()} update {stage}-{i}", date="2003-02-02", body=body
        )

    stages: list[list[NewsArticle]] = [[crime_doc(i) for i in range(10)]]
    for stage in range(1, n_stages):
        stages.append([offtopic_doc(stage, i) for i in range(6)])
    return stages, query, labels


# -- retrieval timing across index flavors --------------------------------------


@dataclass(frozen=True)
class BenchRetrievalRow:
    trial: str  # exact | boolean | proximity | wildcard
    method: str  # preprocessed | original | scan
    median_seconds: float
    result_size: int


def _median_time(fn: Callable[[], object], repetitions: int) -> tuple[float, int]:
    times = []
    size = 0
    for _ in range(repetitions):
        started = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - started)
        size = len(out) if hasattr(out, "__len__") else 0
    return statistics.median(times), size


def _pick_terms(corpus, lexicon) -> dict[str, object]:
    """Deterministic trial inputs: a mid-frequency lemma for exact, two for
    boolean, the planted adjacency pair for proximity, a prefix pattern for
    wildcard."""
    df: dict[str, int] = {}
    for tokens in corpus.pre_tokens.values():
        for t in set(tokens):
            df[t] = df.get(t, 0) + 1
    n = len(corpus.pre_tokens)
    band = [t for t, c in sorted(df.items()) if 0.05 * n <= c <= 0.3 * n]
    exact = band[0] if band else sorted(df)[0]
    second = band[len(band) // 2] if len(band) > 1 else exact
    return {
        "exact": exact,
        "boolean": (exact, second),
        "proximity": ("war", "iraq", 2),
        "wildcard": "go*",
    }


def bench_retrieval(
    n_docs: int = 10_000, repetitions: int = 20, seed: int = 11
) -> list[BenchRetrievalRow]:
    """Four trial types, each timed three ways: preprocessed index, original
    index, and a no-index full scan over the stored token lists / article
    text."""
    from .preprocess import load_default_lexicon, load_default_stoplist, tokenize

    corpus = token_corpus(n_docs, seed=seed)
    lexicon = load_default_lexicon()
    job = JobConfig(initial_workers=4, max_workers=4)
    pre, _ = build_preprocessed_index(
        sorted(corpus.pre_tokens), corpus.pre_tokens.__getitem__, job
    )

    def read_article(key: str) -> NewsArticle:
        return make_article(
            uri=corpus.uris[key], title="t", date="2003-01-01", body=corpus.original_text[key]
        )

    orig, _ = build_original_index(sorted(corpus.original_text), read_article, job)
    # the original index tokenizes "title body"; rebuild our scan views the
    # same way for a fair no-index baseline
    orig_tokens = {
        k: tokenize(f"t {text}").tokens for k, text in corpus.original_text.items()
    }
    engine = QueryEngine(pre, orig, lexicon, thesaurus=Thesaurus.empty())
    picks = _pick_terms(corpus, lexicon)

    def stem_term(t: str) -> str:
        return lexicon.stem_token(t)

    def exact_pre(term: str):
        return {p.doc_id for p in pre.postings_for(stem_term(term))}

    def exact_orig(term: str):
        # the original index holds unstemmed forms: answering a stemmed exact
        # query means scanning its vocabulary
        target = stem_term(term)
        docs: set[str] = set()
        for vocab_term in orig.vocabulary():
            if stem_term(vocab_term) == target:
                docs.update(p.doc_id for p in orig.postings_for(vocab_term))
        return docs

    def exact_scan(term: str):
        target = stem_term(term)
        return {k for k, toks in corpus.pre_tokens.items() if target in toks}

    def proximity_positions(tokens, t1, t2, k) -> bool:
        p1 = [i for i, t in enumerate(tokens) if t == t1]
        p2 = [i for i, t in enumerate(tokens) if t == t2]
        return any(abs(a - b) <= k for a in p1 for b in p2)

    t1, t2, k = picks["proximity"]
    b1, b2 = picks["boolean"]
    pattern_rx = wildcard_regex(picks["wildcard"])

    def wildcard_over(index):
        docs: set[str] = set()
        for term in index.vocabulary():
            if pattern_rx.match(term):
                docs.update(p.doc_id for p in index.postings_for(term))
        return docs

    methods: dict[str, dict[str, Callable[[], object]]] = {
        "exact": {
            "preprocessed": lambda: exact_pre(picks["exact"]),
            "original": lambda: exact_orig(picks["exact"]),
            "scan": lambda: exact_scan(picks["exact"]),
        },
        "boolean": {
            "preprocessed": lambda: exact_pre(b1) & exact_pre(b2),
            "original": lambda: exact_orig(b1) & exact_orig(b2),
            "scan": lambda: exact_scan(b1) & exact_scan(b2),
        },
        "proximity": {
            "original": lambda: engine.eval_proximity(t1, t2, k),
            # fallback: candidates from the preprocessed index, then rescan
            # the documents because it kept no positions
            "preprocessed": lambda: {
                key
                for key in exact_pre(t1) & exact_pre(t2)
                if proximity_positions(
                    tokenize(f"t {corpus.original_text[key]}").tokens, t1, t2, k
                )
            },
            "scan": lambda: {
                key
                for key, toks in orig_tokens.items()
                if proximity_positions(toks, t1, t2, k)
            },
        },
        "wildcard": {
            "preprocessed": lambda: wildcard_over(pre),
            "original": lambda: wildcard_over(orig),
            "scan": lambda: {
                key
                for key, toks in orig_tokens.items()
                if any(pattern_rx.match(t) for t in set(toks))
            },
        },
    }

    rows = []
    for trial in ("exact", "boolean", "proximity", "wildcard"):
        for method in ("preprocessed", "original", "scan"):
            median, size = _median_time(methods[trial][method], repetitions)
            rows.append(BenchRetrievalRow(trial, method, median, size))
    return rows
