"""Application configuration: key=value file plus CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .pipeline import JobConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AppConfig:
    # store
    shard_count: int = 4
    replication_factor: int = 2
    # worker pool
    initial_workers: int = 4
    max_workers: int = 8
    task_timeout_ms: float = 30_000.0
    max_retries: int = 2
    # ranking
    idf_log_base: float = 10.0
    # summarizer defaults
    summary_articles: int = 5
    summary_sentences: int = 5
    # optional resource overrides (default: packaged files)
    stoplist_path: str = ""
    lexicon_path: str = ""
    thesaurus_path: str = ""

    def job_config(
        self,
        workers: int | None = None,
        max_workers: int | None = None,
        task_timeout_ms: float | None = None,
        max_retries: int | None = None,
    ) -> JobConfig:
        initial = workers if workers is not None else self.initial_workers
        cap = max_workers if max_workers is not None else max(self.max_workers, initial)
        return JobConfig(
            initial_workers=initial,
            max_workers=max(cap, initial),
            task_timeout_ms=task_timeout_ms
            if task_timeout_ms is not None
            else self.task_timeout_ms,
            max_retries=max_retries if max_retries is not None else self.max_retries,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(AppConfig)}


def load_config(path: Path | str) -> AppConfig:
    """Parse key=value lines; '#' starts a comment, unknown keys are errors."""
    values: dict[str, object] = {}
    for n, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        kind = _FIELD_TYPES[key]
        try:
            if kind == "int":
                values[key] = int(raw)
            elif kind == "float":
                values[key] = float(raw)
            else:
                values[key] = raw
        except ValueError as exc:
            raise ConfigError(f"{path}:{n}: bad value for {key}: {raw!r}") from exc
    return replace(AppConfig(), **values)
