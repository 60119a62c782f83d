"""Search engine facade: one object owning the store, both indexes and the
lexical resources. The HTTP service and the CLI both render through it, so
their payloads are byte-identical by construction."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .config import AppConfig
from .docstore import DocStore
from .indexer import ORIGINAL, PREPROCESSED, load_index, persist_index
from .preprocess import (
    Lexicon,
    StopList,
    load_default_lexicon,
    load_default_stoplist,
)
from .queryengine import QueryEngine, QueryRequest, Thesaurus, load_default_thesaurus
from .resultsxml import (
    SummaryDocument,
    SummaryLine,
    build_results_document,
    emit_article_xml,
    emit_results_xml,
    emit_summary_xml,
)
from .summarizer import Summarizer, SummarySpec


class EngineError(RuntimeError):
    pass


def store_root(data_dir: Path | str) -> Path:
    return Path(data_dir) / "store"


def index_path(data_dir: Path | str, kind: str) -> Path:
    return Path(data_dir) / "index" / f"{kind}.idx"


@dataclass
class Resources:
    stoplist: StopList
    lexicon: Lexicon
    thesaurus: Thesaurus

    @classmethod
    def load(cls, config: AppConfig) -> "Resources":
        stoplist = (
            StopList.load(config.stoplist_path)
            if config.stoplist_path
            else load_default_stoplist()
        )
        lexicon = (
            Lexicon.load(config.lexicon_path)
            if config.lexicon_path
            else load_default_lexicon()
        )
        thesaurus = (
            Thesaurus.load(config.thesaurus_path)
            if config.thesaurus_path
            else load_default_thesaurus()
        )
        return cls(stoplist, lexicon, thesaurus)


class SearchEngine:
    """Read side of the artifact: queries, summaries, article lookups."""

    def __init__(
        self,
        store: DocStore,
        query_engine: QueryEngine,
        resources: Resources,
        config: AppConfig,
    ):
        self.store = store
        self.query_engine = query_engine
        self.resources = resources
        self.config = config
        self.summarizer = Summarizer(query_engine, resources.stoplist, resources.lexicon)

    @classmethod
    def open(
        cls, data_dir: Path | str, config: AppConfig | None = None, mode: str = "memory"
    ) -> "SearchEngine":
        config = config or AppConfig()
        resources = Resources.load(config)
        store = DocStore.open(
            store_root(data_dir), config.shard_count, config.replication_factor
        )
        pre_path = index_path(data_dir, PREPROCESSED)
        orig_path = index_path(data_dir, ORIGINAL)
        for p in (pre_path, orig_path):
            if not p.is_file():
                raise EngineError(f"missing index file {p}; run 'index build' first")
        query_engine = QueryEngine(
            load_index(pre_path, mode=mode),
            load_index(orig_path, mode=mode),
            resources.lexicon,
            thesaurus=resources.thesaurus,
            store=store,
            idf_base=config.idf_log_base,
        )
        return cls(store, query_engine, resources, config)

    # -- XML surfaces (shared verbatim by CLI and HTTP) ---------------------

    def search_xml(self, query: str, mode: str = "exact", expand: bool = False) -> bytes:
        request = QueryRequest(query, mode=mode, expand=expand)
        ranked = self.query_engine.search(request)
        fetched = self.query_engine.fetch_ranked(ranked)
        return emit_results_xml(build_results_document(query, fetched))

    def summary_xml(
        self, query: str, articles: int | None = None, sentences: int | None = None
    ) -> bytes:
        spec = SummarySpec(
            query,
            article_budget=articles or self.config.summary_articles,
            sentence_budget=self.config.summary_sentences
            if sentences is None
            else sentences,
        )
        result = self.summarizer.summarize(spec)
        doc = SummaryDocument(
            query=query,
            sentences=tuple(
                SummaryLine(s.article_id, s.article_rank, s.sentence_index, s.text)
                for s in result.sentences
            ),
        )
        return emit_summary_xml(doc)

    def article_xml(self, key: str) -> bytes:
        return emit_article_xml(self.store.get_article(key))

    def close(self) -> None:
        for index in (self.query_engine.preprocessed, self.query_engine.original):
            close = getattr(index, "close", None)
            if close:
                close()


def build_indexes(data_dir: Path | str, config: AppConfig, kind: str = "both", job=None):
    """(Re)build index files from the store. The on-disk swap is atomic per
    file; a serving process keeps its loaded generation until restarted."""
    from .indexer import build_original_index, build_preprocessed_index

    config = config or AppConfig()
    job = job or config.job_config()
    store = DocStore.open(
        store_root(data_dir), config.shard_count, config.replication_factor
    )
    reports = {}
    if kind in ("preprocessed", "both"):
        keys = store.token_keys()
        index, report = build_preprocessed_index(keys, store.get_tokens, job)
        persist_index(index, index_path(data_dir, PREPROCESSED))
        reports[PREPROCESSED] = (index, report)
    if kind in ("original", "both"):
        keys = store.article_keys()
        index, report = build_original_index(keys, store.get_article, job)
        persist_index(index, index_path(data_dir, ORIGINAL))
        reports[ORIGINAL] = (index, report)
    if not reports:
        raise ValueError(f"unknown index kind {kind!r}")
    return reports
