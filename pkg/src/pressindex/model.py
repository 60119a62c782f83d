"""Shared domain records."""

from __future__ import annotations

from dataclasses import dataclass

from .ids import article_id


@dataclass(frozen=True)
class NewsArticle:
    """One fetched news item.

    ``id`` is the 16-hex FNV-1a 64 of the canonicalized URI, so re-crawling
    the same link always produces the same record key. ``body`` may be empty
    (flagged by the crawler, not fatal); ``title`` may not.
    """

    id: str
    uri: str
    title: str
    date: str
    body: str


def make_article(uri: str, title: str, date: str, body: str) -> NewsArticle:
    """Build a NewsArticle with its id derived from the URI."""
    if not title:
        raise ValueError("article title must be non-empty")
    return NewsArticle(id=article_id(uri), uri=uri, title=title, date=date, body=body)
