"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The heavy fixtures (200-article corpus, 10k-doc timing corpus, stub-latency
crawls) are built here; result-set checks run against the independent
full-scan oracle in oracle.py.
"""

import math
import random
import shutil
import subprocess
import sys
import time
import xml.etree.ElementTree as ET
from contextlib import contextmanager
from pathlib import Path

import pytest

from oracle import (
    OracleEvaluator,
    load_corpus_from_store,
    load_lexicon_map,
    load_thesaurus_map,
    oracle_tokenize,
)

from pressindex.bench import (
    bench_crawl,
    bench_retrieval,
    bench_stall,
    build_precision_fixture,
    eval_precision,
)
from pressindex.config import AppConfig
from pressindex.crawler import FileBackend, crawl_feeds, load_feed_sources
from pressindex.docstore import DocStore
from pressindex.engine import Resources, SearchEngine, build_indexes, index_path, store_root
from pressindex.indexer import idf, tfidf
from pressindex.pipeline import JobConfig
from pressindex.preprocess import default_resource_path, preprocess_all
from pressindex.queryengine import QueryRequest
from pressindex.resultsxml import (
    ResultEntry,
    ResultsDocument,
    emit_results_xml,
    parse_results_xml,
)
from pressindex.summarizer import SummarySpec


@contextmanager
def criterion(name: str):
    from conftest import record_criterion

    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL")
        record_criterion(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {name}: PASS")
    record_criterion(f"ACCEPTANCE {name}: PASS")


def run_pipeline(feed_dir: Path, data_dir: Path, workers: int, config: AppConfig) -> None:
    job = JobConfig(initial_workers=workers, max_workers=workers)
    store = DocStore.open(store_root(data_dir), config.shard_count, config.replication_factor)
    feeds = load_feed_sources([feed_dir])
    crawl_feeds(feeds, job, store, FileBackend())
    resources = Resources.load(config)
    preprocess_all(store, resources.stoplist, resources.lexicon, job)
    build_indexes(data_dir, config, job=job)


def snapshot_files(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


@pytest.fixture(scope="session")
def workspace(tmp_path_factory):
    """200-article fixture corpus: 2 feeds x 100 links, crawled through the
    file backend, preprocessed and indexed."""
    from pressindex.synthcorpus import write_fixture_site

    root = tmp_path_factory.mktemp("acceptance")
    site = root / "site"
    write_fixture_site(site, 2, 100, seed=17)
    data_dir = root / "data"
    config = AppConfig()
    run_pipeline(site / "feeds", data_dir, workers=4, config=config)
    return {"root": root, "site": site, "data_dir": data_dir, "config": config}


@pytest.fixture(scope="session")
def engine(workspace):
    eng = SearchEngine.open(workspace["data_dir"], workspace["config"])
    yield eng
    eng.close()


@pytest.fixture(scope="session")
def oracle_eval(workspace):
    corpus = load_corpus_from_store(store_root(workspace["data_dir"]))
    lexicon = load_lexicon_map(default_resource_path("lexicon.tsv"))
    thesaurus = load_thesaurus_map(default_resource_path("thesaurus.tsv"))
    return OracleEvaluator(corpus, lexicon, thesaurus)


# -- query generation for criterion 1 -----------------------------------------


def generate_queries(oracle: OracleEvaluator, n: int = 500, seed: int = 99):
    """(raw string, oracle tree, mode, expand) tuples across all modes.

    Trees are built alongside the strings from flat templates, so the oracle
    never runs the engine's parser.
    """
    rng = random.Random(seed)
    corpus = oracle.corpus
    stemmed_vocab = sorted({t for toks in corpus.pre_tokens.values() for t in toks})
    orig_vocab = sorted({t for toks in corpus.original_tokens.values() for t in toks})
    inflected = sorted(
        t for t in orig_vocab if oracle.lexicon.get(t, t) != t
    ) or stemmed_vocab
    near_hits = []
    for toks in list(corpus.original_tokens.values())[:60]:
        if len(toks) > 6:
            i = rng.randrange(len(toks) - 4)
            d = rng.randint(1, 4)
            near_hits.append((toks[i], toks[i + d], d))
    thesaurus_keys = sorted(oracle.thesaurus)

    def term() -> str:
        bucket = rng.random()
        if bucket < 0.55:
            return rng.choice(stemmed_vocab)
        if bucket < 0.85:
            return rng.choice(inflected)
        if bucket < 0.95:
            return rng.choice(thesaurus_keys)
        return rng.choice(["zzzmissing", "qqqabsent", "xxxnothing"])

    def pattern(allow_degenerate: bool = True) -> str:
        # degenerate (metacharacter-free) patterns are only wildcards in
        # wildcard mode; inside the boolean grammar a bare word is a term
        w = rng.choice([t for t in orig_vocab if len(t) >= 3])
        kind = rng.random()
        if kind < 0.4:
            return w[:3] + "*"
        if kind < 0.6:
            return "?" + w[1:]
        if kind < 0.8 or not allow_degenerate:
            return w[0] + "*" + w[-1]
        return w

    queries = []

    for _ in range(120):  # exact
        terms = [term() for _ in range(rng.randint(1, 3))]
        queries.append((" ".join(terms), ("exactbag", terms), "exact", False))

    for _ in range(80):  # expanded
        terms = [term() for _ in range(rng.randint(1, 2))]
        queries.append((" ".join(terms), ("expanded", terms), "exact", True))

    def t(x):
        return ("term", x)

    bool_templates = [
        lambda a, b, c: (f"{a} AND {b}", ("and", t(a), t(b))),
        lambda a, b, c: (f"{a} OR {b}", ("or", t(a), t(b))),
        lambda a, b, c: (f"NOT {a}", ("not", t(a))),
        lambda a, b, c: (f"{a} NOT {b}", ("and", t(a), ("not", t(b)))),
        lambda a, b, c: (f"{a} {b}", ("and", t(a), t(b))),
        lambda a, b, c: (f"{a} OR {b} AND {c}", ("or", t(a), ("and", t(b), t(c)))),
        lambda a, b, c: (f"{a} AND {b} OR {c}", ("or", ("and", t(a), t(b)), t(c))),
        lambda a, b, c: (f"NOT {a} OR {b}", ("or", ("not", t(a)), t(b))),
        lambda a, b, c: (f"{a} AND {b} AND {c}", ("and", ("and", t(a), t(b)), t(c))),
        lambda a, b, c: (f"NOT {a} {b}", ("and", ("not", t(a)), t(b))),
    ]
    for i in range(150):  # boolean
        a, b, c = term(), term(), term()
        if i % 10 == 8:
            p = pattern(allow_degenerate=False)
            queries.append(
                (f"{p} AND {a}", ("and", ("wildcard", p), t(a)), "boolean", False)
            )
        elif i % 10 == 9 and near_hits:
            t1, t2, d = rng.choice(near_hits)
            queries.append(
                (
                    f'"{t1} {t2}"~{d} {a}',
                    ("and", ("near", t1, t2, d), t(a)),
                    "boolean",
                    False,
                )
            )
        else:
            raw, tree = rng.choice(bool_templates)(a, b, c)
            queries.append((raw, tree, "boolean", False))

    for _ in range(80):  # wildcard mode
        pats = [pattern() for _ in range(rng.randint(1, 2))]
        tree = ("wildcard", pats[0])
        for p in pats[1:]:
            tree = ("or", tree, ("wildcard", p))
        queries.append((" ".join(pats), tree, "wildcard", False))

    for i in range(n - len(queries)):  # proximity
        if near_hits and i % 2 == 0:
            t1, t2, d = rng.choice(near_hits)
            k = d if i % 4 == 0 else max(0, d - 1)
        else:
            t1, t2 = rng.choice(orig_vocab), rng.choice(orig_vocab)
            k = rng.randint(0, 5)
        queries.append((f'"{t1} {t2}"~{k}', ("near", t1, t2, k), "proximity", False))

    assert len(queries) == n
    return queries


class TestAcceptance:
    def test_c1_oracle_equivalence_500_queries(self, engine, oracle_eval):
        with criterion("oracle-equivalence-500-queries"):
            started = time.perf_counter()
            queries = generate_queries(oracle_eval, n=500)
            mismatches = []
            for raw, tree, mode, expand in queries:
                got = {
                    r.doc_id
                    for r in engine.query_engine.search(
                        QueryRequest(raw, mode=mode, expand=expand)
                    )
                }
                want = oracle_eval.eval(tree)
                if got != want:
                    mismatches.append((raw, mode, sorted(got)[:5], sorted(want)[:5]))
            elapsed = time.perf_counter() - started
            assert not mismatches, mismatches[:5]
            assert elapsed < 60.0, f"took {elapsed:.1f}s"

    def test_c2_idf_tfidf_numerics(self, engine, oracle_eval):
        with criterion("eq1-eq2-numerics"):
            index = engine.query_engine.preprocessed

            # fixed-point checks straight from the formulas
            from pressindex.indexer import InvertedIndex, Posting

            fixed = InvertedIndex(
                "preprocessed",
                {"t": tuple(Posting(f"{i:03d}", 1) for i in range(10))},
                {f"{i:03d}": 1 for i in range(100)},
            )
            assert abs(idf("t", fixed) - 1.0) <= 1e-12
            small = InvertedIndex(
                "preprocessed",
                {"t": (Posting("a", 1), Posting("b", 1))},
                {k: 1 for k in "abcdefgh"},
            )
            assert abs(tfidf(2, idf("t", small)) - 2 * math.log10(4)) <= 1e-12

            # five corpus terms against a hand recount over raw token CSVs
            corpus = oracle_eval.corpus
            n_docs = len(corpus.pre_tokens)
            assert n_docs == index.n_docs
            df_hand: dict[str, int] = {}
            for toks in corpus.pre_tokens.values():
                for t in set(toks):
                    df_hand[t] = df_hand.get(t, 0) + 1
            sample = sorted(df_hand)[:: max(1, len(df_hand) // 5)][:5]
            assert len(sample) == 5
            for term in sample:
                hand = math.log10(n_docs / df_hand[term])
                assert abs(idf(term, index) - hand) <= 1e-12, term

    def test_c3_determinism_workers_1_vs_8(self, workspace, tmp_path_factory):
        with criterion("determinism-workers-1-vs-8"):
            root = tmp_path_factory.mktemp("determinism")
            config = workspace["config"]
            runs = {}
            for workers in (1, 8):
                data_dir = root / f"run-{workers}"
                run_pipeline(workspace["site"] / "feeds", data_dir, workers, config)
                runs[workers] = {
                    "store": snapshot_files(store_root(data_dir)),
                    "pre": index_path(data_dir, "preprocessed").read_bytes(),
                    "orig": index_path(data_dir, "original").read_bytes(),
                }
            assert runs[1]["store"] == runs[8]["store"]
            assert runs[1]["pre"] == runs[8]["pre"]
            assert runs[1]["orig"] == runs[8]["orig"]
            assert len(runs[1]["store"]) > 0

    def test_c4_crawl_scaling_trend(self, tmp_path_factory):
        with criterion("crawl-scaling-trend"):
            started = time.perf_counter()
            workdir = tmp_path_factory.mktemp("bench-crawl")
            rows = bench_crawl(
                [8], workers=8, workdir=workdir, links_per_feed=100, latency_ms=50.0
            )
            (row,) = rows
            assert row.links == 800
            assert row.ratio <= 0.25, f"ratio {row.ratio:.3f}"

            stall = bench_stall(
                workdir / "stall",
                n_links=8,
                latency_ms=200.0,
                stall_ms=5_000.0,
                max_workers=4,
            )
            assert stall.peak_workers >= 2
            assert stall.elastic_wall < stall.static_wall
            elapsed = time.perf_counter() - started
            assert elapsed < 180.0, f"took {elapsed:.1f}s"

    def test_c5_fault_tolerance_any_single_shard(self, workspace, tmp_path_factory):
        with criterion("fault-tolerance-single-shard-loss"):
            config = workspace["config"]
            assert config.shard_count == 4 and config.replication_factor == 2
            source = store_root(workspace["data_dir"])
            reference = DocStore.open(source, 4, 2)
            article_keys = reference.article_keys()
            token_keys = reference.token_keys()
            assert len(article_keys) == 200
            scratch = tmp_path_factory.mktemp("kill-test")
            for shard in range(4):
                root = scratch / f"minus-{shard}"
                shutil.copytree(source, root)
                shutil.rmtree(root / f"shard-{shard}")
                store = DocStore.open(root, 4, 2)
                for key in article_keys:
                    store.get_article(key)  # raises on loss
                scanned = [item for item in store.scan("article")]
                assert [s.key for s in scanned] == sorted(article_keys)
                assert all(s.error is None for s in scanned)
                assert set(store.token_keys()) == set(token_keys)

    def test_c6_precision_trend_normal_vs_expanded(self):
        with criterion("precision-trend-normal-vs-expanded"):
            stages, query, labels = build_precision_fixture(n_stages=5)
            resources = Resources.load(AppConfig())
            report = eval_precision(stages, query, labels, resources)
            normal = report.series("normal")
            expanded = report.series("expanded")
            assert len(expanded) >= 4
            assert all(b < a for a, b in zip(expanded, expanded[1:])), expanded
            assert max(normal) - min(normal) <= 0.1, normal
            retrieved = {}
            for t in report.trials:
                retrieved.setdefault(t.corpus_size, {})[t.mode] = t.retrieved
            for counts in retrieved.values():
                assert counts["expanded"] >= counts["normal"]

    def test_c7_retrieval_timing_ordinal(self):
        with criterion("retrieval-timing-ordinal-10k"):
            rows = bench_retrieval(n_docs=10_000, repetitions=20, seed=11)
            cell = {(r.trial, r.method): r.median_seconds for r in rows}
            assert cell[("exact", "preprocessed")] <= 0.1 * cell[("exact", "scan")], cell
            assert cell[("proximity", "original")] < cell[("proximity", "preprocessed")], cell
            for trial in ("exact", "boolean", "wildcard"):
                assert cell[(trial, "preprocessed")] < cell[(trial, "original")], (trial, cell)

    def test_c8_summarizer_properties(self, engine):
        with criterion("summarizer-properties"):
            for query in ("war", "kill", "flood", "election"):
                spec = SummarySpec(query, article_budget=4, sentence_budget=5)
                result = engine.summarizer.summarize(spec)
                assert len(result.sentences) <= 5
                assert len({s.article_id for s in result.sentences}) <= 4
                order = [(s.article_rank, s.sentence_index) for s in result.sentences]
                assert order == sorted(order)
                for s in result.sentences:
                    body = engine.store.get_article(s.article_id).body
                    assert s.text in body  # character-exact extractiveness
                # expansion lockout: requesting expansion changes nothing
                expanded = engine.summarizer.summarize(
                    SummarySpec(query, article_budget=4, sentence_budget=5, expand_requested=True)
                )
                assert [s.text for s in expanded.sentences] == [
                    s.text for s in result.sentences
                ]

    def test_c9_xml_contract(self, workspace, engine):
        with criterion("xml-contract"):
            rng = random.Random(4242)
            alphabet = (
                "abcdefghijklmnopqrstuvwxyz0123456789 &<>\"'-.,;:!#$%()[]{}@é世"
            )

            def text(max_len=30):
                return "".join(
                    rng.choice(alphabet) for _ in range(rng.randint(0, max_len))
                )

            def keyword():
                return "".join(
                    rng.choice("abcdefghijklmnopqrstuvwxyz0123456789")
                    for _ in range(rng.randint(1, 8))
                )

            for _ in range(1000):
                entries = tuple(
                    ResultEntry(
                        id=i + 1,
                        keywords=tuple(keyword() for _ in range(rng.randint(0, 3))),
                        title=text(),
                        date=text(10),
                        body=text(60),
                    )
                    for i in range(rng.randint(0, 6))
                )
                doc = ResultsDocument(query=text(), total=len(entries), entries=entries)
                payload = emit_results_xml(doc)
                ET.fromstring(payload)  # well-formed per a conformant parser
                assert parse_results_xml(payload) == doc

            # CLI vs HTTP byte identity over real transports
            import socket
            import threading

            import requests
            import uvicorn

            from pressindex.service import create_app

            app = create_app(engine=engine)
            with socket.socket() as sock:
                sock.bind(("127.0.0.1", 0))
                port = sock.getsockname()[1]
            server = uvicorn.Server(
                uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
            )
            thread = threading.Thread(target=server.run, daemon=True)
            thread.start()
            base = f"http://127.0.0.1:{port}"
            for _ in range(200):
                try:
                    if requests.get(base + "/healthz", timeout=1).status_code == 200:
                        break
                except requests.ConnectionError:
                    time.sleep(0.05)
            else:
                pytest.fail("gateway did not come up")

            sample = [
                ("war", "exact", 0),
                ("kill", "exact", 1),
                ("flood storm", "exact", 0),
                ("war AND iraq", "boolean", 0),
                ("war OR peace", "boolean", 0),
                ("NOT war", "boolean", 0),
                ("election NOT vote", "boolean", 0),
                ("go*", "wildcard", 0),
                ("hel?", "wildcard", 0),
                ("st*m", "wildcard", 0),
                ('"war iraq"~2', "proximity", 0),
                ('"iraq war"~0', "proximity", 0),
                ("government", "exact", 0),
                ("out", "exact", 0),
                ("eliminate", "exact", 1),
                ("kill AND police", "boolean", 0),
                ("storm OR flood AND rain", "boolean", 0),
                ("evacu*", "wildcard", 0),
                ('"the war"~1', "proximity", 0),
                ("market growth", "exact", 1),
            ]
            assert len(sample) == 20
            try:
                for q, mode, expand in sample:
                    resp = requests.get(
                        base + "/search",
                        params={"q": q, "mode": mode, "expand": expand},
                        timeout=30,
                    )
                    assert resp.status_code == 200, (q, resp.text)
                    cli = subprocess.run(
                        [
                            sys.executable,
                            "-m",
                            "pressindex.cli",
                            "--data-dir",
                            str(workspace["data_dir"]),
                            "search",
                            "-q",
                            q,
                            "--mode",
                            mode,
                            "--expand" if expand else "--no-expand",
                        ],
                        capture_output=True,
                        check=True,
                    )
                    assert cli.stdout == resp.content, (q, mode)
            finally:
                server.should_exit = True
                thread.join(timeout=5)
