import socket
import threading
import time

import pytest
import requests
import uvicorn
from click.testing import CliRunner

from pressindex.cli import main
from pressindex.config import AppConfig, ConfigError, load_config
from pressindex.resultsxml import parse_results_xml
from pressindex.synthcorpus import write_fixture_site


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    write_fixture_site(root / "site", 1, 12, seed=31)
    runner = CliRunner()
    data = str(root / "data")
    for args in (
        ["--data-dir", data, "ingest", "--feeds", str(root / "site" / "feeds"), "--workers", "2"],
        ["--data-dir", data, "preprocess"],
        ["--data-dir", data, "index", "build"],
    ):
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
    return root, data


class TestCommands:
    def test_ingest_reports_counts(self, workspace):
        root, _ = workspace
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["--data-dir", str(root / "data2"), "ingest", "--feeds", str(root / "site" / "feeds")],
        )
        assert result.exit_code == 0
        assert "stored 12" in result.output

    def test_search_outputs_results_xml(self, workspace):
        _, data = workspace
        result = CliRunner().invoke(main, ["--data-dir", data, "search", "-q", "war"])
        assert result.exit_code == 0, result.output
        doc = parse_results_xml(result.stdout.encode("utf-8"))
        assert doc.query == "war"

    def test_search_bad_query_fails(self, workspace):
        _, data = workspace
        result = CliRunner().invoke(
            main, ["--data-dir", data, "search", "-q", "war AND", "--mode", "boolean"]
        )
        assert result.exit_code != 0

    def test_summarize_outputs_xml(self, workspace):
        _, data = workspace
        result = CliRunner().invoke(
            main, ["--data-dir", data, "summarize", "-q", "war", "-m", "2", "-b", "2"]
        )
        assert result.exit_code == 0, result.output
        assert result.stdout.startswith("<summary ")

    def test_index_stats(self, workspace):
        _, data = workspace
        result = CliRunner().invoke(main, ["--data-dir", data, "index", "stats"])
        assert result.exit_code == 0
        assert "preprocessed:" in result.output
        assert "original:" in result.output

    def test_store_stats_and_repair(self, workspace):
        _, data = workspace
        result = CliRunner().invoke(main, ["--data-dir", data, "store", "stats"])
        assert result.exit_code == 0
        assert "under-replicated 0" in result.output
        result = CliRunner().invoke(main, ["--data-dir", data, "store", "repair"])
        assert result.exit_code == 0
        assert "restored 0 copies" in result.output

    def test_search_without_indexes_errors(self, tmp_path):
        result = CliRunner().invoke(
            main, ["--data-dir", str(tmp_path / "empty"), "search", "-q", "war"]
        )
        assert result.exit_code != 0


class TestConfigFile:
    def test_load_and_override(self, tmp_path):
        cfg = tmp_path / "app.conf"
        cfg.write_text(
            "# comment\n"
            "shard_count=8\n"
            "replication_factor=3\n"
            "task_timeout_ms=1500.5\n"
            "idf_log_base=10\n"
            "summary_sentences=7\n"
        )
        loaded = load_config(cfg)
        assert loaded.shard_count == 8
        assert loaded.replication_factor == 3
        assert loaded.task_timeout_ms == 1500.5
        assert loaded.summary_sentences == 7
        assert loaded == AppConfig(
            shard_count=8, replication_factor=3, task_timeout_ms=1500.5, summary_sentences=7
        )

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.conf"
        cfg.write_text("nonsense=1\n")
        with pytest.raises(ConfigError):
            load_config(cfg)

    def test_bad_value_rejected(self, tmp_path):
        cfg = tmp_path / "bad.conf"
        cfg.write_text("shard_count=four\n")
        with pytest.raises(ConfigError):
            load_config(cfg)

    def test_job_config_override(self):
        cfg = AppConfig(initial_workers=2, max_workers=4)
        job = cfg.job_config(workers=8)
        assert job.initial_workers == 8
        assert job.max_workers == 8  # cap raised to match


class TestThinClient:
    def test_search_via_server_matches_local(self, workspace):
        _, data = workspace
        from pressindex.engine import SearchEngine
        from pressindex.service import create_app

        engine = SearchEngine.open(data, AppConfig())
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
        for _ in range(100):
            try:
                if requests.get(base + "/healthz", timeout=1).status_code == 200:
                    break
            except requests.ConnectionError:
                time.sleep(0.05)
        else:
            pytest.fail("server did not come up")
        try:
            local = CliRunner().invoke(main, ["--data-dir", data, "search", "-q", "war"])
            remote = CliRunner().invoke(
                main, ["--data-dir", data, "search", "-q", "war", "--server", base]
            )
            assert remote.exit_code == 0, remote.output
            assert remote.stdout == local.stdout
        finally:
            server.should_exit = True
            thread.join(timeout=5)
