"""Stable identifiers: FNV-1a 64-bit hashing and URI canonicalization.

Article ids and shard placement both derive from FNV-1a so that every
component (crawler, store, indexes) agrees on identity across runs and
platforms.
"""

from __future__ import annotations

from urllib.parse import urlsplit, urlunsplit

FNV64_OFFSET = 14695981039346656037
FNV64_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of ``data``."""
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def canonicalize_uri(uri: str) -> str:
    """Normalize a URI for identity: lowercase scheme and host, drop the
    fragment, keep path and query untouched."""
    parts = urlsplit(uri.strip())
    return urlunsplit(
        (parts.scheme.lower(), parts.netloc.lower(), parts.path, parts.query, "")
    )


def article_id(uri: str) -> str:
    """16-hex-char article id; a pure function of the canonicalized URI."""
    return f"{fnv1a64(canonicalize_uri(uri).encode('utf-8')):016x}"
