"""Command-line front end.

Dataset generation commands (ingest, preprocess, index build) drive the core
package directly; the retrieval commands (search, summarize) can also act as
thin clients of a running gateway via --server, in which case they print the
HTTP body verbatim.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import AppConfig, load_config
from .crawler import FileBackend, HttpBackend, crawl_feeds, load_feed_sources
from .docstore import DocStore
from .engine import SearchEngine, build_indexes, index_path, store_root
from .indexer import load_index
from .preprocess import Lexicon, StopList, preprocess_all
from .queryengine import MODES


class Ctx:
    def __init__(self, data_dir: Path, config: AppConfig, workers: int | None):
        self.data_dir = data_dir
        self.config = config
        self.workers = workers

    def job(self, workers: int | None = None):
        return self.config.job_config(workers=workers or self.workers)

    def store(self) -> DocStore:
        return DocStore.open(
            store_root(self.data_dir),
            self.config.shard_count,
            self.config.replication_factor,
        )


@click.group()
@click.option("--data-dir", default="data", type=click.Path(path_type=Path), show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--workers", type=int, default=None, help="Initial worker count override.")
@click.pass_context
def main(ctx: click.Context, data_dir: Path, config_path: Path | None, workers: int | None):
    """News retrieval engine: crawl, preprocess, index, search, summarize."""
    config = load_config(config_path) if config_path else AppConfig()
    ctx.obj = Ctx(data_dir, config, workers)


@main.command()
@click.option("--feeds", "feed_paths", multiple=True, required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Feed file or directory of *.xml feeds; repeatable.")
@click.option("--backend", type=click.Choice(["file", "http"]), default="file", show_default=True)
@click.option("--workers", type=int, default=None)
@click.pass_obj
def ingest(ctx: Ctx, feed_paths, backend, workers):
    """Crawl feed-listed links into the article store."""
    sources = load_feed_sources(feed_paths)
    fetcher = FileBackend() if backend == "file" else HttpBackend()
    report = crawl_feeds(sources, ctx.job(workers), ctx.store(), fetcher)
    click.echo(
        f"stored {len(report.stored)}  errored {len(report.errored)}  "
        f"deduped {len(report.deduped)}  (links {report.total_links}, "
        f"peak workers {report.job.peak_workers}, wall {report.job.wall_time:.2f}s)"
    )
    for link, error in report.errored:
        click.echo(f"  error {link}: {error}", err=True)


@main.command("preprocess")
@click.option("--stoplist", "stoplist_path", type=click.Path(exists=True, path_type=Path))
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True, path_type=Path))
@click.option("--workers", type=int, default=None)
@click.pass_obj
def preprocess_cmd(ctx: Ctx, stoplist_path, lexicon_path, workers):
    """Tokenize, count, de-stopword and stem every stored article."""
    from .preprocess import load_default_lexicon, load_default_stoplist

    stoplist = StopList.load(stoplist_path) if stoplist_path else load_default_stoplist()
    lexicon = Lexicon.load(lexicon_path) if lexicon_path else load_default_lexicon()
    report = preprocess_all(ctx.store(), stoplist, lexicon, ctx.job(workers))
    click.echo(
        f"preprocessed {len(report.done)} articles, {len(report.failed)} failures, "
        f"wall {report.wall_time:.2f}s"
    )
    for task in report.failed:
        click.echo(f"  failed {task.payload_ref}: {task.error}", err=True)


@main.group()
def index():
    """Index maintenance."""


@index.command("build")
@click.option("--kind", type=click.Choice(["preprocessed", "original", "both"]),
              default="both", show_default=True)
@click.pass_obj
def index_build(ctx: Ctx, kind):
    """Build index files from the store."""
    reports = build_indexes(ctx.data_dir, ctx.config, kind=kind, job=ctx.job())
    for name, (built, report) in reports.items():
        click.echo(
            f"{name}: {built.n_docs} docs, {sum(1 for _ in built.vocabulary())} terms, "
            f"{len(report.failed)} skipped"
        )


@index.command("stats")
@click.pass_obj
def index_stats(ctx: Ctx):
    """Describe the persisted index files."""
    for kind in ("preprocessed", "original"):
        path = index_path(ctx.data_dir, kind)
        if not path.is_file():
            click.echo(f"{kind}: missing ({path})")
            continue
        idx = load_index(path)
        click.echo(
            f"{kind}: {idx.n_docs} docs, {sum(1 for _ in idx.vocabulary())} terms, "
            f"{path.stat().st_size} bytes"
        )


def _client_get(server: str, path: str, params: dict) -> bytes:
    import requests

    resp = requests.get(server.rstrip("/") + path, params=params, timeout=30)
    if resp.status_code != 200:
        raise click.ClickException(f"HTTP {resp.status_code}: {resp.text}")
    return resp.content


@main.command()
@click.option("--query", "-q", required=True)
@click.option("--mode", type=click.Choice(list(MODES)), default="exact", show_default=True)
@click.option("--expand/--no-expand", default=False)
@click.option("--server", default=None, help="Base URL of a running gateway; acts as a thin client.")
@click.pass_obj
def search(ctx: Ctx, query, mode, expand, server):
    """Run a query and print the results XML."""
    if server:
        payload = _client_get(
            server, "/search", {"q": query, "mode": mode, "expand": int(expand)}
        )
    else:
        engine = SearchEngine.open(ctx.data_dir, ctx.config)
        try:
            payload = engine.search_xml(query, mode=mode, expand=expand)
        finally:
            engine.close()
    sys.stdout.buffer.write(payload)
    sys.stdout.buffer.flush()


@main.command()
@click.option("--query", "-q", required=True)
@click.option("--articles", "-m", type=int, default=None, help="Article budget M.")
@click.option("--sentences", "-b", type=int, default=None, help="Sentence budget B.")
@click.option("--server", default=None)
@click.pass_obj
def summarize(ctx: Ctx, query, articles, sentences, server):
    """Summarize the top-ranked articles and print the summary XML."""
    if server:
        params = {"q": query}
        if articles is not None:
            params["m"] = articles
        if sentences is not None:
            params["b"] = sentences
        payload = _client_get(server, "/summary", params)
    else:
        engine = SearchEngine.open(ctx.data_dir, ctx.config)
        try:
            payload = engine.summary_xml(query, articles=articles, sentences=sentences)
        finally:
            engine.close()
    sys.stdout.buffer.write(payload)
    sys.stdout.buffer.flush()


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
@click.pass_obj
def serve(ctx: Ctx, host, port):
    """Run the HTTP gateway."""
    import uvicorn

    from .service import create_app

    app = create_app(ctx.data_dir, ctx.config)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command("bench-crawl")
@click.option("--feeds", "feed_counts", multiple=True, type=int, default=(1, 2, 4, 8),
              show_default=True)
@click.option("--workers", type=int, default=8, show_default=True)
@click.option("--links", type=int, default=100, show_default=True)
@click.option("--latency-ms", type=float, default=50.0, show_default=True)
@click.pass_obj
def bench_crawl_cmd(ctx: Ctx, feed_counts, workers, links, latency_ms):
    """Crawl scaling: elastic pool vs static single worker on a stub backend."""
    import tempfile

    from .bench import bench_crawl

    with tempfile.TemporaryDirectory() as tmp:
        rows = bench_crawl(list(feed_counts), workers, Path(tmp), links, latency_ms)
    click.echo(f"{'feeds':>6} {'links':>6} {'elastic_s':>10} {'baseline_s':>11} {'ratio':>6}")
    for row in rows:
        click.echo(
            f"{row.feeds:>6} {row.links:>6} {row.elastic_wall:>10.2f} "
            f"{row.baseline_wall:>11.2f} {row.ratio:>6.2f}"
        )


@main.command("eval-precision")
@click.option("--query", default=None, help="Query term (defaults to the builtin fixture's).")
@click.option("--stages", "stages_dir", type=click.Path(exists=True, path_type=Path),
              help="Directory of stage-*/ page directories; omit to use the builtin fixture.")
@click.option("--labels", "labels_path", type=click.Path(exists=True, path_type=Path),
              help="TSV of query<TAB>uri-or-filename<TAB>0|1.")
@click.pass_obj
def eval_precision_cmd(ctx: Ctx, query, stages_dir, labels_path):
    """Precision of normal vs expanded querying over a growing corpus."""
    from .bench import build_precision_fixture, eval_precision
    from .engine import Resources

    resources = Resources.load(ctx.config)
    if stages_dir is None:
        stage_batches, fixture_query, labels = build_precision_fixture()
        query = query or fixture_query
    else:
        if not query or not labels_path:
            raise click.ClickException("--stages requires --query and --labels")
        labels = {}
        for line in Path(labels_path).read_text("utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            q, target, flag = line.split("\t")
            if q == query:
                labels[target] = flag.strip() == "1"
        from .crawler import FileBackend, extract_article

        backend = FileBackend()
        stage_batches = []
        for stage in sorted(p for p in stages_dir.iterdir() if p.is_dir()):
            batch = []
            for page in sorted(stage.iterdir()):
                raw = backend.fetch(page.as_uri())
                batch.append(extract_article(raw))
            stage_batches.append(batch)
    report = eval_precision(stage_batches, query, labels, resources)
    click.echo(f"query: {report.query}")
    click.echo(f"{'docs':>6} {'mode':>9} {'retrieved':>10} {'relevant':>9} {'precision':>10}")
    for t in report.trials:
        click.echo(
            f"{t.corpus_size:>6} {t.mode:>9} {t.retrieved:>10} "
            f"{t.relevant_retrieved:>9} {t.precision:>10.3f}"
        )


@main.command("bench-retrieval")
@click.option("--docs", type=int, default=10_000, show_default=True)
@click.option("--repetitions", type=int, default=20, show_default=True)
@click.pass_obj
def bench_retrieval_cmd(ctx: Ctx, docs, repetitions):
    """Retrieval timing: preprocessed index vs original index vs full scan."""
    from .bench import bench_retrieval

    rows = bench_retrieval(n_docs=docs, repetitions=repetitions)
    click.echo(f"{'trial':>10} {'method':>13} {'median_ms':>10} {'results':>8}")
    for row in rows:
        click.echo(
            f"{row.trial:>10} {row.method:>13} {row.median_seconds * 1e3:>10.3f} "
            f"{row.result_size:>8}"
        )


@main.group()
def store():
    """Store maintenance."""


@store.command("repair")
@click.pass_obj
def store_repair(ctx: Ctx):
    """Restore missing or corrupt replicas from intact copies."""
    report = ctx.store().repair()
    click.echo(f"restored {report.copies_restored} copies")
    for item in report.unrepairable:
        click.echo(f"  unrepairable: {item}", err=True)


@store.command("stats")
@click.pass_obj
def store_stats(ctx: Ctx):
    """Describe shard occupancy and replication health."""
    stats = ctx.store().stats()
    click.echo(
        f"shards {stats.shard_count}, replication {stats.replication_factor}, "
        f"articles {stats.keys_by_kind.get('article', 0)}, "
        f"tokens {stats.keys_by_kind.get('tokens', 0)}, "
        f"under-replicated {stats.under_replicated}"
    )
    for shard, count in sorted(stats.files_by_shard.items()):
        click.echo(f"  shard-{shard}: {count} files")


if __name__ == "__main__":
    main()
