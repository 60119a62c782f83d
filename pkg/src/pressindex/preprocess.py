"""Text preprocessing: tokenize, count, stopword removal, lexicon stemming.

The stage order is fixed: tokenize (punctuation and symbols act as
separators), take the total word count, drop stopwords, then stem through a
file-backed lexicon; words missing from the lexicon (names, places, numbers)
pass through unchanged. Output token lists are persisted as CSV records.

The token alphabet is ASCII [a-z0-9]; non-ASCII letters separate tokens,
which keeps wildcard and proximity semantics unambiguous for English news.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .model import NewsArticle

TOKEN_RE = re.compile(r"[a-z0-9]+")
_VALID_TOKEN_RE = re.compile(r"[a-z0-9]+\Z")


class ResourceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TokenStream:
    """Ordered tokens plus the pre-stopword word count.

    ``word_count`` is fixed at tokenize time; later stages carry it through
    untouched because counting happens before stopword removal.
    """

    tokens: tuple[str, ...]
    word_count: int


class StopList:
    """Set of stopwords loaded from one shared file (one token per line,
    ``#`` comments)."""

    def __init__(self, words: frozenset[str]):
        for w in words:
            if not _VALID_TOKEN_RE.fullmatch(w):
                raise ResourceFormatError(f"stopword {w!r} outside [a-z0-9]+")
        self.words = words

    def __contains__(self, token: str) -> bool:
        return token in self.words

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def load(cls, path: Path | str) -> "StopList":
        words = set()
        for line in Path(path).read_text("utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                words.add(line)
        return cls(frozenset(words))


class Lexicon:
    """Inflected form -> lemma mapping (TAB-separated pairs, one per line).

    Stands in for a dictionary service; lemmas map to themselves so stemming
    is idempotent.
    """

    def __init__(self, mapping: dict[str, str]):
        for form, lemma in mapping.items():
            if not _VALID_TOKEN_RE.fullmatch(form) or not _VALID_TOKEN_RE.fullmatch(lemma):
                raise ResourceFormatError(f"lexicon entry {form!r} -> {lemma!r} outside [a-z0-9]+")
        self.mapping = mapping

    def stem_token(self, token: str) -> str:
        return self.mapping.get(token, token)

    def __len__(self) -> int:
        return len(self.mapping)

    @classmethod
    def load(cls, path: Path | str) -> "Lexicon":
        mapping: dict[str, str] = {}
        for n, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].rstrip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ResourceFormatError(f"{path}:{n}: expected 'form<TAB>lemma'")
            mapping[parts[0].strip()] = parts[1].strip()
        return cls(mapping)


def tokenize(text: str) -> TokenStream:
    """Lowercase the text and split it into maximal [a-z0-9]+ runs.

    Everything else is a separator and is discarded. ``word_count`` equals
    the number of tokens produced here.
    """
    tokens = tuple(TOKEN_RE.findall(text.lower()))
    return TokenStream(tokens, len(tokens))


def remove_stopwords(stream: TokenStream, stoplist: StopList) -> TokenStream:
    kept = tuple(t for t in stream.tokens if t not in stoplist)
    return TokenStream(kept, stream.word_count)


def stem(stream: TokenStream, lexicon: Lexicon) -> TokenStream:
    return TokenStream(
        tuple(lexicon.stem_token(t) for t in stream.tokens), stream.word_count
    )


def preprocess_text(text: str, stoplist: StopList, lexicon: Lexicon) -> TokenStream:
    """tokenize -> count -> remove stopwords -> stem, in that order."""
    return stem(remove_stopwords(tokenize(text), stoplist), lexicon)


def article_text(article: NewsArticle) -> str:
    """The text both indexes see: title and body as one token stream."""
    return f"{article.title} {article.body}"


def preprocess_article(
    article: NewsArticle,
    stoplist: StopList,
    lexicon: Lexicon,
    store=None,
) -> list[str]:
    """Full preprocessing of one article; persists the CSV token record when
    a store is given and returns the ordered token list."""
    stream = preprocess_text(article_text(article), stoplist, lexicon)
    tokens = list(stream.tokens)
    if store is not None:
        store.put_tokens(article.id, tokens)
    return tokens


def preprocess_all(store, stoplist: StopList, lexicon: Lexicon, job) -> "JobReport":
    """Preprocess every stored article on the worker pool and persist the
    token records. Returns the pipeline report."""
    from .pipeline import run_tasks

    keys = store.article_keys()

    def work(key: str) -> int:
        article = store.get_article(key)
        return len(preprocess_article(article, stoplist, lexicon, store))

    _, report = run_tasks(job, keys, work)
    return report


def default_resource_path(name: str) -> Path:
    return Path(__file__).parent / "resources" / name


def load_default_stoplist() -> StopList:
    return StopList.load(default_resource_path("stoplist.txt"))


def load_default_lexicon() -> Lexicon:
    return Lexicon.load(default_resource_path("lexicon.tsv"))
