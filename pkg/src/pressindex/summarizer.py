"""Query-focused extractive summarization of the top-ranked articles.

The committed procedure: rank articles for the query with expansion forced
off, take the top M, segment their bodies into sentences, score each
sentence as the sum over query terms of in-sentence count times corpus IDF,
then keep the B best (ties go to the earlier article rank, then the lower
sentence index). Output keeps (article rank, sentence index) order and every
sentence is a character-exact substring of its source article.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .indexer import UnknownTerm, idf
from .model import NewsArticle
from .preprocess import Lexicon, StopList, preprocess_text
from .queryengine import QueryEngine, QueryRequest

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class Sentence:
    article_id: str
    index: int
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class SummarySpec:
    query: str
    article_budget: int = 5
    sentence_budget: int = 5
    expand_requested: bool = False  # honored only to prove it has no effect

    def __post_init__(self) -> None:
        if self.article_budget < 1:
            raise ValueError("article_budget must be >= 1")
        if self.sentence_budget < 0:
            raise ValueError("sentence_budget must be >= 0")


@dataclass(frozen=True)
class SummarySentence:
    article_id: str
    article_rank: int  # 1-based rank of the source article
    sentence_index: int
    text: str
    score: float


@dataclass
class SummaryResult:
    query: str
    sentences: list[SummarySentence] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.sentences


def segment_sentences(body: str) -> list[str]:
    """Split after '.', '!' or '?' followed by whitespace; abbreviations are
    not special-cased. Pieces are verbatim substrings of the body."""
    if not body.strip():
        return []
    return [piece for piece in _SENTENCE_SPLIT_RE.split(body) if piece.strip()]


def sentence_tokens(text: str, stoplist: StopList, lexicon: Lexicon) -> tuple[str, ...]:
    return preprocess_text(text, stoplist, lexicon).tokens


def score_sentence(tokens: tuple[str, ...], query_terms: list[str], index, base: float = 10.0) -> float:
    """Sum over query terms of count(term in sentence) * idf(term); terms
    unknown to the index contribute 0."""
    score = 0.0
    for term in dict.fromkeys(query_terms):
        count = sum(1 for t in tokens if t == term)
        if not count:
            continue
        try:
            score += count * idf(term, index, base)
        except UnknownTerm:
            continue
    return score


class Summarizer:
    def __init__(self, engine: QueryEngine, stoplist: StopList, lexicon: Lexicon):
        if engine.store is None:
            raise ValueError("summarizer needs a query engine with a store")
        self.engine = engine
        self.stoplist = stoplist
        self.lexicon = lexicon

    def summarize(self, spec: SummarySpec) -> SummaryResult:
        request = QueryRequest(
            spec.query, mode="exact", expand=spec.expand_requested, for_summary=True
        )
        ranked = self.engine.search(request)
        result = SummaryResult(spec.query)
        if not ranked or spec.sentence_budget == 0:
            return result

        top = ranked[: spec.article_budget]
        query_terms = self.engine.exact_terms(spec.query)
        candidates: list[SummarySentence] = []
        for rank, entry in enumerate(top, start=1):
            fetched = self.engine.fetch_ranked([entry])[0]
            if fetched.article is None:
                continue
            for index, text in enumerate(segment_sentences(fetched.article.body)):
                tokens = sentence_tokens(text, self.stoplist, self.lexicon)
                score = score_sentence(
                    tokens, query_terms, self.engine.preprocessed, self.engine.idf_base
                )
                candidates.append(
                    SummarySentence(entry.doc_id, rank, index, text, score)
                )

        candidates.sort(key=lambda s: (-s.score, s.article_rank, s.sentence_index))
        chosen = candidates[: spec.sentence_budget]
        chosen.sort(key=lambda s: (s.article_rank, s.sentence_index))
        result.sentences = chosen
        return result
