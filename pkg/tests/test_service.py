import pytest
from fastapi.testclient import TestClient

from pressindex.config import AppConfig
from pressindex.crawler import FileBackend, crawl_feeds, load_feed_sources
from pressindex.engine import Resources, SearchEngine, build_indexes, store_root
from pressindex.docstore import DocStore
from pressindex.pipeline import JobConfig
from pressindex.preprocess import preprocess_all
from pressindex.resultsxml import parse_results_xml, parse_summary_xml
from pressindex.service import create_app
from pressindex.synthcorpus import write_fixture_site


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc")
    data_dir = root / "data"
    config = AppConfig()
    feeds = load_feed_sources(write_fixture_site(root / "site", 2, 10, seed=21))
    job = JobConfig(initial_workers=4, max_workers=4)
    store = DocStore.open(store_root(data_dir), config.shard_count, config.replication_factor)
    crawl_feeds(feeds, job, store, FileBackend())
    resources = Resources.load(config)
    preprocess_all(store, resources.stoplist, resources.lexicon, job)
    build_indexes(data_dir, config, job=job)
    return data_dir, config


@pytest.fixture(scope="module")
def client(workspace):
    data_dir, config = workspace
    engine = SearchEngine.open(data_dir, config)
    app = create_app(engine=engine, config=config)
    with TestClient(app) as c:
        yield c, engine


class TestEndpoints:
    def test_healthz(self, client):
        c, _ = client
        resp = c.get("/healthz")
        assert resp.status_code == 200
        assert resp.text == "ok"

    def test_search_matches_engine_bytes(self, client):
        c, engine = client
        for mode, q in (
            ("exact", "war"),
            ("boolean", "war AND iraq"),
            ("wildcard", "go*"),
            ("proximity", '"war iraq"~3'),
        ):
            resp = c.get("/search", params={"q": q, "mode": mode})
            assert resp.status_code == 200, resp.text
            assert resp.headers["content-type"].startswith("application/xml")
            assert resp.content == engine.search_xml(q, mode=mode)

    def test_search_expand_flag(self, client):
        c, engine = client
        resp = c.get("/search", params={"q": "kill", "mode": "exact", "expand": 1})
        assert resp.content == engine.search_xml("kill", mode="exact", expand=True)

    def test_search_results_parse(self, client):
        c, _ = client
        resp = c.get("/search", params={"q": "war"})
        doc = parse_results_xml(resp.content)
        assert doc.query == "war"
        assert doc.total == len(doc.entries)

    def test_syntax_error_400_with_message(self, client):
        c, _ = client
        resp = c.get("/search", params={"q": "war AND", "mode": "boolean"})
        assert resp.status_code == 400
        assert "dangling operator" in resp.text

    def test_rejected_wildcard_400(self, client):
        c, _ = client
        resp = c.get("/search", params={"q": "*", "mode": "wildcard"})
        assert resp.status_code == 400

    def test_unknown_mode_400(self, client):
        c, _ = client
        resp = c.get("/search", params={"q": "war", "mode": "fuzzy"})
        assert resp.status_code == 400

    def test_summary_endpoint(self, client):
        c, engine = client
        resp = c.get("/summary", params={"q": "war", "m": 3, "b": 2})
        assert resp.status_code == 200
        assert resp.content == engine.summary_xml("war", articles=3, sentences=2)
        doc = parse_summary_xml(resp.content)
        assert len(doc.sentences) <= 2

    def test_article_endpoint(self, client):
        c, engine = client
        key = engine.store.article_keys()[0]
        resp = c.get(f"/article/{key}")
        assert resp.status_code == 200
        assert resp.content == engine.article_xml(key)

    def test_article_404(self, client):
        c, _ = client
        resp = c.get("/article/deadbeefdeadbeef")
        assert resp.status_code == 404

    def test_cors_header(self, client):
        c, _ = client
        resp = c.get("/healthz", headers={"Origin": "http://localhost:5173"})
        assert resp.headers.get("access-control-allow-origin") == "*"

    def test_stats_json(self, client):
        c, engine = client
        resp = c.get("/stats")
        assert resp.status_code == 200
        body = resp.json()
        assert body["documents"] == engine.query_engine.preprocessed.n_docs
        assert body["store_keys"]["article"] == body["documents"]


class TestStreamModeParity:
    def test_disk_backed_engine_same_bytes(self, workspace):
        data_dir, config = workspace
        mem = SearchEngine.open(data_dir, config, mode="memory")
        disk = SearchEngine.open(data_dir, config, mode="stream")
        try:
            for q, mode in (("war", "exact"), ("go*", "wildcard"), ('"war iraq"~2', "proximity")):
                assert mem.search_xml(q, mode=mode) == disk.search_xml(q, mode=mode)
        finally:
            disk.close()
            mem.close()
