"""HTTP gateway: the read-side endpoints the 3D results explorer consumes.

All handlers are read-only over immutable indexes; responses are
byte-identical to the corresponding CLI command output for identical
parameters because both render through the same SearchEngine facade.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import docstore
from .config import AppConfig
from .engine import SearchEngine
from .queryengine import MODES, QuerySyntaxError, RejectedQuery


class StatsResponse(BaseModel):
    documents: int
    preprocessed_terms: int
    original_terms: int
    store_keys: dict[str, int]
    under_replicated: int


def create_app(
    data_dir: Path | str | None = None,
    config: AppConfig | None = None,
    engine: SearchEngine | None = None,
) -> FastAPI:
    """Build the service; pass a ready SearchEngine (tests) or a data_dir to
    load one at startup."""
    if engine is None and data_dir is None:
        raise ValueError("create_app needs a data_dir or an engine")
    config = config or AppConfig()
    app = FastAPI(title="pressindex", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
    )
    state = {"engine": engine}

    def get_engine() -> SearchEngine:
        if state["engine"] is None:
            state["engine"] = SearchEngine.open(data_dir, config)
        return state["engine"]

    @app.exception_handler(QuerySyntaxError)
    async def syntax_error_handler(_request, exc: QuerySyntaxError):
        return PlainTextResponse(str(exc), status_code=400)

    @app.exception_handler(RejectedQuery)
    async def rejected_handler(_request, exc: RejectedQuery):
        return PlainTextResponse(str(exc), status_code=400)

    @app.exception_handler(docstore.NotFound)
    async def not_found_handler(_request, exc: docstore.NotFound):
        return PlainTextResponse(str(exc), status_code=404)

    @app.exception_handler(docstore.StoreError)
    async def store_error_handler(_request, exc: docstore.StoreError):
        return PlainTextResponse(str(exc), status_code=500)

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.get("/search")
    def search(
        q: str = Query(..., min_length=1),
        mode: str = Query("exact"),
        expand: int = Query(0, ge=0, le=1),
    ) -> Response:
        if mode not in MODES:
            return PlainTextResponse(
                f"unknown mode {mode!r}, expected one of {', '.join(MODES)}",
                status_code=400,
            )
        payload = get_engine().search_xml(q, mode=mode, expand=bool(expand))
        return Response(content=payload, media_type="application/xml")

    @app.get("/summary")
    def summary(
        q: str = Query(..., min_length=1),
        m: int | None = Query(None, ge=1),
        b: int | None = Query(None, ge=0),
    ) -> Response:
        payload = get_engine().summary_xml(q, articles=m, sentences=b)
        return Response(content=payload, media_type="application/xml")

    @app.get("/article/{key}")
    def article(key: str) -> Response:
        payload = get_engine().article_xml(key)
        return Response(content=payload, media_type="application/xml")

    @app.get("/stats")
    def stats() -> StatsResponse:
        engine = get_engine()
        store_stats = engine.store.stats()
        return StatsResponse(
            documents=engine.query_engine.preprocessed.n_docs,
            preprocessed_terms=sum(1 for _ in engine.query_engine.preprocessed.vocabulary()),
            original_terms=sum(1 for _ in engine.query_engine.original.vocabulary()),
            store_keys=store_stats.keys_by_kind,
            under_replicated=store_stats.under_replicated,
        )

    return app
