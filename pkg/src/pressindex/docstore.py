"""Sharded, write-replicated, file-backed store for articles and token lists.

Layout is a bit-exact contract: ``root/shard-<i>/<kind>/<key>``. Article
records serialize as line 1 uri, line 2 title, line 3 date, line 4.. body
(UTF-8, LF). Token records are the tokens joined with commas. Every put
writes the primary shard ``shard_of(key)`` and its R-1 ring successors
before returning.
"""

from __future__ import annotations

import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .ids import article_id, fnv1a64
from .model import NewsArticle

ARTICLE_KIND = "article"
TOKENS_KIND = "tokens"
KINDS = (ARTICLE_KIND, TOKENS_KIND)

_TOKEN_RE = re.compile(r"[a-z0-9]+\Z")


class StoreError(Exception):
    pass


class NotFound(StoreError):
    pass


class CorruptRecord(StoreError):
    pass


class InvariantViolation(StoreError):
    pass


class PutError(StoreError):
    """A replica write failed; ``written`` lists shards holding copies so a
    repair pass can finish the job."""

    def __init__(self, key: str, kind: str, written: list[int], cause: Exception):
        super().__init__(f"put {kind}/{key} failed after shards {written}: {cause}")
        self.key = key
        self.kind = kind
        self.written = written


@dataclass(frozen=True)
class StoreConfig:
    root: Path
    shard_count: int = 4
    replication_factor: int = 2

    def __post_init__(self) -> None:
        if self.shard_count < 1:
            raise ValueError("shard_count must be >= 1")
        if not 1 <= self.replication_factor <= self.shard_count:
            raise ValueError("replication_factor must be in [1, shard_count]")


def shard_of(key: str, shard_count: int) -> int:
    """Primary shard for a key: FNV-1a 64 of the key bytes mod shard count.

    Stable across runs and platforms by construction.
    """
    return fnv1a64(key.encode("ascii")) % shard_count


def serialize_article(article: NewsArticle) -> bytes:
    for name in ("uri", "title", "date"):
        if "\n" in getattr(article, name):
            raise InvariantViolation(f"article {name} may not contain newlines")
    if not article.title:
        raise InvariantViolation("article title must be non-empty")
    return f"{article.uri}\n{article.title}\n{article.date}\n{article.body}".encode("utf-8")


def parse_article(key: str, data: bytes) -> NewsArticle:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptRecord(f"{key}: undecodable article record") from exc
    parts = text.split("\n", 3)
    if len(parts) != 4:
        raise CorruptRecord(f"{key}: article record has fewer than 4 lines")
    uri, title, date, body = parts
    if not uri or not title:
        raise CorruptRecord(f"{key}: empty uri or title line")
    if article_id(uri) != key:
        raise CorruptRecord(f"{key}: record uri hashes to a different key")
    return NewsArticle(id=key, uri=uri, title=title, date=date, body=body)


def serialize_tokens(tokens: list[str]) -> bytes:
    for tok in tokens:
        if not _TOKEN_RE.fullmatch(tok):
            raise InvariantViolation(f"token {tok!r} outside [a-z0-9]+")
    return ",".join(tokens).encode("ascii")


def parse_tokens(key: str, data: bytes) -> list[str]:
    if data == b"":
        return []
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise CorruptRecord(f"{key}: undecodable tokens record") from exc
    tokens = text.split(",")
    for tok in tokens:
        if not _TOKEN_RE.fullmatch(tok):
            raise CorruptRecord(f"{key}: malformed token {tok!r}")
    return tokens


@dataclass(frozen=True)
class ScanItem:
    key: str
    payload: bytes | None
    error: str | None = None


@dataclass
class RepairReport:
    copies_restored: int = 0
    unrepairable: list[str] = field(default_factory=list)


@dataclass
class StoreStats:
    shard_count: int
    replication_factor: int
    keys_by_kind: dict[str, int]
    files_by_shard: dict[int, int]
    under_replicated: int


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class DocStore:
    """Concurrent-safe store handle.

    Reads are always safe; writes to the same key are serialized with a
    per-key lock, distinct keys proceed in parallel.
    """

    def __init__(self, config: StoreConfig):
        self.config = config
        self.root = Path(config.root)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    @classmethod
    def open(cls, root: Path | str, shard_count: int = 4, replication_factor: int = 2) -> "DocStore":
        return cls(StoreConfig(Path(root), shard_count, replication_factor))

    # -- placement ---------------------------------------------------------

    def replica_shards(self, key: str) -> list[int]:
        p = shard_of(key, self.config.shard_count)
        return [
            (p + i) % self.config.shard_count
            for i in range(self.config.replication_factor)
        ]

    def _path(self, shard: int, kind: str, key: str) -> Path:
        return self.root / f"shard-{shard}" / kind / key

    def _key_lock(self, key: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(key)
            if lock is None:
                lock = self._locks[key] = threading.Lock()
            return lock

    # -- writes -------------------------------------------------------------

    def _put(self, key: str, kind: str, data: bytes) -> None:
        with self._key_lock(key):
            written: list[int] = []
            for shard in self.replica_shards(key):
                path = self._path(shard, kind, key)
                try:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    _write_atomic(path, data)
                except OSError as exc:
                    raise PutError(key, kind, written, exc) from exc
                written.append(shard)

    def put_article(self, article: NewsArticle) -> str:
        data = serialize_article(article)
        self._put(article.id, ARTICLE_KIND, data)
        return article.id

    def put_tokens(self, key: str, tokens: list[str]) -> None:
        self._put(key, TOKENS_KIND, serialize_tokens(tokens))

    # -- reads --------------------------------------------------------------

    def _get(self, key: str, kind: str) -> bytes:
        found = False
        last: CorruptRecord | None = None
        for shard in self.replica_shards(key):
            path = self._path(shard, kind, key)
            try:
                data = path.read_bytes()
            except FileNotFoundError:
                continue
            except OSError:
                continue
            found = True
            try:
                if kind == ARTICLE_KIND:
                    parse_article(key, data)
                else:
                    parse_tokens(key, data)
            except CorruptRecord as exc:
                last = exc
                continue
            return data
        if found:
            raise last or CorruptRecord(f"{key}: all copies corrupt")
        raise NotFound(f"{kind}/{key}")

    def get_article(self, key: str) -> NewsArticle:
        return parse_article(key, self._get(key, ARTICLE_KIND))

    def get_tokens(self, key: str) -> list[str]:
        return parse_tokens(key, self._get(key, TOKENS_KIND))

    # -- scans --------------------------------------------------------------

    def _all_keys(self, kind: str) -> list[str]:
        keys: set[str] = set()
        for shard in range(self.config.shard_count):
            d = self.root / f"shard-{shard}" / kind
            if not d.is_dir():
                continue
            keys.update(n for n in os.listdir(d) if not n.endswith(".tmp"))
        return sorted(keys)

    def scan(self, kind: str) -> Iterator[ScanItem]:
        """Yield each stored key exactly once, key-sorted, despite
        replication; corrupt records come back as error items and the scan
        continues. The key listing is snapshotted up front."""
        if kind not in KINDS:
            raise ValueError(f"unknown record kind {kind!r}")
        for key in self._all_keys(kind):
            try:
                yield ScanItem(key, self._get(key, kind))
            except StoreError as exc:
                yield ScanItem(key, None, str(exc))

    def scan_articles(self) -> Iterator[tuple[str, NewsArticle]]:
        for item in self.scan(ARTICLE_KIND):
            if item.error is None:
                yield item.key, parse_article(item.key, item.payload)

    def article_keys(self) -> list[str]:
        return self._all_keys(ARTICLE_KIND)

    def token_keys(self) -> list[str]:
        return self._all_keys(TOKENS_KIND)

    # -- maintenance ---------------------------------------------------------

    def repair(self) -> RepairReport:
        """Restore missing or corrupt replicas from any intact copy."""
        report = RepairReport()
        for kind in KINDS:
            for key in self._all_keys(kind):
                try:
                    data = self._get(key, kind)
                except StoreError:
                    report.unrepairable.append(f"{kind}/{key}")
                    continue
                for shard in self.replica_shards(key):
                    path = self._path(shard, kind, key)
                    if path.is_file() and path.read_bytes() == data:
                        continue
                    path.parent.mkdir(parents=True, exist_ok=True)
                    _write_atomic(path, data)
                    report.copies_restored += 1
        return report

    def stats(self) -> StoreStats:
        keys_by_kind = {kind: len(self._all_keys(kind)) for kind in KINDS}
        files_by_shard: dict[int, int] = {}
        for shard in range(self.config.shard_count):
            count = 0
            for kind in KINDS:
                d = self.root / f"shard-{shard}" / kind
                if d.is_dir():
                    count += sum(1 for n in os.listdir(d) if not n.endswith(".tmp"))
            files_by_shard[shard] = count
        under = 0
        for kind in KINDS:
            for key in self._all_keys(kind):
                copies = sum(
                    1 for s in self.replica_shards(key) if self._path(s, kind, key).is_file()
                )
                if copies < self.config.replication_factor:
                    under += 1
        return StoreStats(
            shard_count=self.config.shard_count,
            replication_factor=self.config.replication_factor,
            keys_by_kind=keys_by_kind,
            files_by_shard=files_by_shard,
            under_replicated=under,
        )
