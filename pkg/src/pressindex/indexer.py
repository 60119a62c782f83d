"""Dual inverted indexes and their persistence.

The preprocessed index covers the stored token CSVs and serves exact-match
retrieval; the original index tokenizes articles as they were before
preprocessing (no stopword removal, no stemming) and carries positional
offsets for proximity and wildcard search. Both are built map-reduce style:
map emits per-document term counts, reduce merges postings per term.

The file format is little-endian and versioned: magic, version, kind, doc
table, term table, varint delta-encoded postings, whole-file CRC32.
"""

from __future__ import annotations

import math
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .ids import fnv1a64
from .model import NewsArticle
from .pipeline import JobConfig, JobReport, run_map_reduce
from .preprocess import article_text, tokenize

PREPROCESSED = "preprocessed"
ORIGINAL = "original"

_MAGIC = b"PXIX"
_VERSION = 1
_KIND_CODES = {PREPROCESSED: 0, ORIGINAL: 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
_REDUCE_PARTITIONS = 16


class UnknownTerm(KeyError):
    """The term has no postings; callers wanting a result set should treat it
    as empty postings instead of IDF 0."""


class IndexFormatError(Exception):
    pass


@dataclass(frozen=True)
class Posting:
    doc_id: str
    tf: int
    positions: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.tf < 1:
            raise ValueError("posting tf must be positive")
        if self.positions is not None:
            if len(self.positions) != self.tf:
                raise ValueError("positions length must equal tf")
            if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
                raise ValueError("positions must be strictly increasing")


class InvertedIndex:
    """In-memory index. Immutable after build; any number of readers."""

    def __init__(
        self,
        kind: str,
        postings: dict[str, tuple[Posting, ...]],
        doc_lengths: dict[str, int],
    ):
        if kind not in _KIND_CODES:
            raise ValueError(f"unknown index kind {kind!r}")
        self.kind = kind
        self._postings = dict(sorted(postings.items()))
        self._doc_lengths = dict(sorted(doc_lengths.items()))
        self._doc_ids = tuple(self._doc_lengths)

    @property
    def n_docs(self) -> int:
        return len(self._doc_lengths)

    def vocabulary(self) -> Iterable[str]:
        return self._postings.keys()

    def postings_for(self, term: str) -> tuple[Posting, ...]:
        return self._postings.get(term, ())

    def df(self, term: str) -> int:
        return len(self._postings.get(term, ()))

    def doc_length(self, doc_id: str) -> int:
        return self._doc_lengths[doc_id]

    def doc_ids(self) -> tuple[str, ...]:
        return self._doc_ids

    def doc_lengths(self) -> dict[str, int]:
        return dict(self._doc_lengths)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (InvertedIndex, DiskIndex)):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.doc_lengths() == other.doc_lengths()
            and list(self.vocabulary()) == list(other.vocabulary())
            and all(
                self.postings_for(t) == other.postings_for(t) for t in self.vocabulary()
            )
        )


def idf(term: str, index, base: float = 10.0) -> float:
    """Inverse document frequency: log(N / n_i) in the configured base.

    Unknown terms raise UnknownTerm rather than pretending a frequency.
    """
    n_i = index.df(term)
    if n_i < 1:
        raise UnknownTerm(term)
    ratio = index.n_docs / n_i
    if base == 10.0:
        return math.log10(ratio)
    return math.log(ratio) / math.log(base)


def tfidf(tf: int, idf_value: float) -> float:
    if tf < 0 or idf_value < 0:
        raise ValueError("tf and idf must be non-negative")
    return tf * idf_value


def _reduce_partition_of(key) -> int:
    return fnv1a64(f"{key[0]}:{key[1]}".encode("utf-8")) % _REDUCE_PARTITIONS


def _assemble(kind: str, outputs: dict) -> InvertedIndex:
    postings: dict[str, tuple[Posting, ...]] = {}
    doc_lengths: dict[str, int] = {}
    for key, value in outputs.items():
        if key[0] == "doc":
            doc_lengths[key[1]] = value
        else:
            postings[key[1]] = value
    return InvertedIndex(kind, postings, doc_lengths)


def build_preprocessed_index(
    keys: Sequence[str],
    read_tokens: Callable[[str], list[str]],
    job: JobConfig | None = None,
) -> tuple[InvertedIndex, JobReport]:
    """Index stored token lists. Documents whose token record cannot be read
    are skipped and surface as failed tasks in the report."""
    job = job or JobConfig()

    def map_fn(key: str):
        tokens = read_tokens(key)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        emissions = [(("doc", key), len(tokens))]
        emissions.extend(
            (("term", term), (key, tf)) for term, tf in counts.items()
        )
        return emissions

    def reduce_fn(key, values):
        if key[0] == "doc":
            return values[0]
        return tuple(
            Posting(doc_id, tf) for doc_id, tf in sorted(values)
        )

    outputs, report = run_map_reduce(
        job, list(keys), map_fn, reduce_fn, partition_fn=_reduce_partition_of
    )
    return _assemble(PREPROCESSED, outputs), report


def build_original_index(
    keys: Sequence[str],
    read_article: Callable[[str], NewsArticle],
    job: JobConfig | None = None,
) -> tuple[InvertedIndex, JobReport]:
    """Index articles as fetched: tokenize only, keep 0-based token offsets
    over the title+body stream."""
    job = job or JobConfig()

    def map_fn(key: str):
        article = read_article(key)
        stream = tokenize(article_text(article))
        positions: dict[str, list[int]] = {}
        for pos, tok in enumerate(stream.tokens):
            positions.setdefault(tok, []).append(pos)
        emissions = [(("doc", key), stream.word_count)]
        emissions.extend(
            (("term", term), (key, len(offs), tuple(offs)))
            for term, offs in positions.items()
        )
        return emissions

    def reduce_fn(key, values):
        if key[0] == "doc":
            return values[0]
        return tuple(
            Posting(doc_id, tf, offs) for doc_id, tf, offs in sorted(values)
        )

    outputs, report = run_map_reduce(
        job, list(keys), map_fn, reduce_fn, partition_fn=_reduce_partition_of
    )
    return _assemble(ORIGINAL, outputs), report


# -- persistence --------------------------------------------------------------


def _write_varint(buf: bytearray, value: int) -> None:
    if value < 0:
        raise ValueError("varints are unsigned")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            buf.append(byte | 0x80)
        else:
            buf.append(byte)
            return


def _read_varint(view: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        byte = view[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7


def _encode_postings(postings: Sequence[Posting], ordinals: dict[str, int], with_positions: bool) -> bytes:
    buf = bytearray()
    _write_varint(buf, len(postings))
    prev = -1
    for p in postings:
        ordinal = ordinals[p.doc_id]
        _write_varint(buf, ordinal - prev)
        prev = ordinal
        _write_varint(buf, p.tf)
        if with_positions:
            prev_pos = -1
            for pos in p.positions:
                _write_varint(buf, pos - prev_pos)
                prev_pos = pos
    return bytes(buf)


def _decode_postings(blob: bytes, doc_ids: Sequence[str], with_positions: bool) -> tuple[Posting, ...]:
    count, pos = _read_varint(blob, 0)
    out = []
    ordinal = -1
    for _ in range(count):
        gap, pos = _read_varint(blob, pos)
        ordinal += gap
        tf, pos = _read_varint(blob, pos)
        positions = None
        if with_positions:
            offs = []
            prev = -1
            for _ in range(tf):
                g, pos = _read_varint(blob, pos)
                prev += g
                offs.append(prev)
            positions = tuple(offs)
        out.append(Posting(doc_ids[ordinal], tf, positions))
    return tuple(out)


def persist_index(index, path: Path | str) -> None:
    """Write the index atomically with a trailing whole-file checksum."""
    doc_ids = list(index.doc_ids())
    ordinals = {d: i for i, d in enumerate(doc_ids)}
    with_positions = index.kind == ORIGINAL

    buf = bytearray()
    buf += _MAGIC
    buf += struct.pack("<HBB", _VERSION, _KIND_CODES[index.kind], 0)
    buf += struct.pack("<QI", index.n_docs, len(doc_ids))
    for doc_id in doc_ids:
        raw = doc_id.encode("utf-8")
        buf += struct.pack("<B", len(raw))
        buf += raw
        buf += struct.pack("<I", index.doc_length(doc_id))

    terms = list(index.vocabulary())
    blobs = [
        _encode_postings(index.postings_for(t), ordinals, with_positions) for t in terms
    ]
    buf += struct.pack("<I", len(terms))
    offset = 0
    for term, blob in zip(terms, blobs):
        raw = term.encode("utf-8")
        buf += struct.pack("<H", len(raw))
        buf += raw
        buf += struct.pack("<QI", offset, len(blob))
        offset += len(blob)
    for blob in blobs:
        buf += blob
    buf += struct.pack("<I", zlib.crc32(bytes(buf)))

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(bytes(buf))
    os.replace(tmp, path)


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def unpack(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise IndexFormatError("truncated index file")
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IndexFormatError("truncated index file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out


def _parse_header(data: bytes):
    if len(data) < 4 + 4 + 12 + 4:
        raise IndexFormatError("file too short to be an index")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise IndexFormatError("checksum mismatch (truncated or corrupt index)")
    cur = _Cursor(body)
    if cur.take(4) != _MAGIC:
        raise IndexFormatError("bad magic")
    version, kind_code, _ = cur.unpack("<HBB")
    if version != _VERSION:
        raise IndexFormatError(f"unsupported index version {version}")
    if kind_code not in _KIND_NAMES:
        raise IndexFormatError(f"unknown kind code {kind_code}")
    n_docs, doc_count = cur.unpack("<QI")
    if n_docs != doc_count:
        raise IndexFormatError("document count disagrees with header")
    doc_ids = []
    doc_lengths = {}
    for _ in range(doc_count):
        (id_len,) = cur.unpack("<B")
        doc_id = cur.take(id_len).decode("utf-8")
        (length,) = cur.unpack("<I")
        doc_ids.append(doc_id)
        doc_lengths[doc_id] = length
    (term_count,) = cur.unpack("<I")
    term_table = {}
    order = []
    for _ in range(term_count):
        (t_len,) = cur.unpack("<H")
        term = cur.take(t_len).decode("utf-8")
        offset, nbytes = cur.unpack("<QI")
        term_table[term] = (offset, nbytes)
        order.append(term)
    return _KIND_NAMES[kind_code], doc_ids, doc_lengths, order, term_table, cur.pos


class DiskIndex:
    """Index reader that keeps only the term and doc tables in memory and
    reads posting blobs from disk on demand. Query results are identical to
    the in-memory reader."""

    def __init__(self, path: Path | str):
        self._path = Path(path)
        data = self._path.read_bytes()
        kind, doc_ids, doc_lengths, order, table, base = _parse_header(data)
        self.kind = kind
        self._doc_ids = tuple(doc_ids)
        self._doc_lengths = doc_lengths
        self._order = order
        self._table = table
        self._base = base
        self._fd = os.open(self._path, os.O_RDONLY)
        self._closed = False

    @property
    def n_docs(self) -> int:
        return len(self._doc_lengths)

    def vocabulary(self) -> Iterable[str]:
        return iter(self._order)

    def postings_for(self, term: str) -> tuple[Posting, ...]:
        entry = self._table.get(term)
        if entry is None:
            return ()
        offset, nbytes = entry
        blob = os.pread(self._fd, nbytes, self._base + offset)
        if len(blob) != nbytes:
            raise IndexFormatError("postings blob truncated")
        return _decode_postings(blob, self._doc_ids, self.kind == ORIGINAL)

    def df(self, term: str) -> int:
        entry = self._table.get(term)
        if entry is None:
            return 0
        return len(self.postings_for(term))

    def doc_length(self, doc_id: str) -> int:
        return self._doc_lengths[doc_id]

    def doc_ids(self) -> tuple[str, ...]:
        return self._doc_ids

    def doc_lengths(self) -> dict[str, int]:
        return dict(self._doc_lengths)

    def close(self) -> None:
        if not self._closed:
            os.close(self._fd)
            self._closed = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def load_index(path: Path | str, mode: str = "memory"):
    """Load a persisted index either fully into memory or in stream mode.

    Both verify the whole-file checksum up front; a truncated file never
    yields a partial index.
    """
    if mode == "stream":
        return DiskIndex(path)
    if mode != "memory":
        raise ValueError(f"unknown load mode {mode!r}")
    data = Path(path).read_bytes()
    kind, doc_ids, doc_lengths, order, table, base = _parse_header(data)
    with_positions = kind == ORIGINAL
    postings = {}
    for term in order:
        offset, nbytes = table[term]
        blob = data[base + offset : base + offset + nbytes]
        postings[term] = _decode_postings(blob, doc_ids, with_positions)
    return InvertedIndex(kind, postings, doc_lengths)
