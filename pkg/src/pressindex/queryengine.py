"""Query parsing and evaluation: exact, boolean, wildcard, proximity modes,
thesaurus expansion and TF-IDF ranking.

Grammar (bit-exact contract):

    query    := or_expr
    or_expr  := and_expr ( "OR" and_expr )*
    and_expr := unary ( "AND"? unary )*      -- adjacency is an implicit AND
    unary    := "NOT" unary | atom
    atom     := TERM | WILDCARD | '"' t1 t2 '"' '~' k

Operators are uppercase words; anything else is lowercased with punctuation
stripped exactly like document tokenization. A token containing ``?`` or
``*`` is a wildcard pattern. Exact-match terms are stemmed with the same
lexicon used at preprocess time; wildcard and proximity terms are not (they
target the original index).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import docstore
from .indexer import idf
from .model import NewsArticle
from .preprocess import TOKEN_RE, Lexicon

MODES = ("exact", "boolean", "wildcard", "proximity")


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at {position})")
        self.message = message
        self.position = position


class RejectedQuery(ValueError):
    """A syntactically valid but unbounded query, e.g. the bare pattern *."""


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    token: str


@dataclass(frozen=True)
class And:
    left: "QueryNode"
    right: "QueryNode"


@dataclass(frozen=True)
class Or:
    left: "QueryNode"
    right: "QueryNode"


@dataclass(frozen=True)
class Not:
    child: "QueryNode"


@dataclass(frozen=True)
class Wildcard:
    pattern: str


@dataclass(frozen=True)
class Near:
    t1: str
    t2: str
    k: int


QueryNode = Term | And | Or | Not | Wildcard | Near


@dataclass(frozen=True)
class QueryRequest:
    raw: str
    mode: str = "exact"
    expand: bool = False
    for_summary: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def effective_expand(self) -> bool:
        # summaries always run unexpanded; expansion applies to the
        # exact-match route only
        return self.expand and not self.for_summary and self.mode == "exact"


@dataclass(frozen=True)
class RankedResult:
    doc_id: str
    score: float
    matched_terms: tuple[str, ...]


@dataclass(frozen=True)
class FetchedResult:
    result: RankedResult
    article: NewsArticle | None
    error: str | None = None


# -- thesaurus -----------------------------------------------------------------

_VALID_TOKEN_RE = re.compile(r"[a-z0-9]+\Z")
_RELS = ("syn", "hypo", "coord")


@dataclass(frozen=True)
class ThesaurusEntry:
    synonyms: frozenset[str] = frozenset()
    hyponyms: frozenset[str] = frozenset()
    coordinates: frozenset[str] = frozenset()

    def all_related(self) -> frozenset[str]:
        return self.synonyms | self.hyponyms | self.coordinates


class Thesaurus:
    """lemma -> related terms, loaded from ``lemma TAB rel TAB term`` lines
    with rel in {syn, hypo, coord}."""

    def __init__(self, entries: dict[str, ThesaurusEntry]):
        self.entries = entries

    @classmethod
    def empty(cls) -> "Thesaurus":
        return cls({})

    @classmethod
    def load(cls, path: Path | str) -> "Thesaurus":
        buckets: dict[str, dict[str, set[str]]] = {}
        for n, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].rstrip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[1] not in _RELS:
                raise ValueError(f"{path}:{n}: expected 'lemma<TAB>syn|hypo|coord<TAB>term'")
            lemma, rel, term = (p.strip() for p in parts)
            if not _VALID_TOKEN_RE.fullmatch(lemma) or not _VALID_TOKEN_RE.fullmatch(term):
                raise ValueError(f"{path}:{n}: entries must be lowercase tokens")
            buckets.setdefault(lemma, {r: set() for r in _RELS})[rel].add(term)
        return cls(
            {
                lemma: ThesaurusEntry(
                    frozenset(b["syn"]), frozenset(b["hypo"]), frozenset(b["coord"])
                )
                for lemma, b in buckets.items()
            }
        )

    def related(self, term: str) -> frozenset[str]:
        entry = self.entries.get(term)
        return entry.all_related() if entry else frozenset()


def load_default_thesaurus() -> Thesaurus:
    return Thesaurus.load(Path(__file__).parent / "resources" / "thesaurus.tsv")


# -- lexer / parser ------------------------------------------------------------


@dataclass(frozen=True)
class _Tok:
    kind: str  # term | wildcard | near | and | or | not
    pos: int
    value: str = ""
    near: tuple[str, str, int] | None = None


_WILDCARD_KEEP_RE = re.compile(r"[^a-z0-9?*]+")


def _lex(raw: str) -> list[_Tok]:
    out: list[_Tok] = []
    i, n = 0, len(raw)
    while i < n:
        ch = raw[i]
        if ch.isspace():
            i += 1
            continue
        if ch == '"':
            end = raw.find('"', i + 1)
            if end < 0:
                raise QuerySyntaxError("unterminated quote", i)
            inner = raw[i + 1 : end]
            j = end + 1
            if j >= n or raw[j] != "~":
                raise QuerySyntaxError("expected '~k' after quoted pair", j)
            j += 1
            k_start = j
            while j < n and raw[j].isdigit():
                j += 1
            if j == k_start:
                raise QuerySyntaxError("proximity distance must be a non-negative integer", k_start)
            terms = TOKEN_RE.findall(inner.lower())
            if len(terms) != 2:
                raise QuerySyntaxError("quoted proximity pair must contain exactly two terms", i)
            out.append(_Tok("near", i, near=(terms[0], terms[1], int(raw[k_start:j]))))
            i = j
            continue
        j = i
        while j < n and not raw[j].isspace() and raw[j] != '"':
            j += 1
        word = raw[i:j]
        if word == "AND":
            out.append(_Tok("and", i))
        elif word == "OR":
            out.append(_Tok("or", i))
        elif word == "NOT":
            out.append(_Tok("not", i))
        elif "?" in word or "*" in word:
            pattern = _WILDCARD_KEEP_RE.sub("", word.lower())
            if pattern:
                out.append(_Tok("wildcard", i, value=pattern))
        else:
            for term in TOKEN_RE.findall(word.lower()):
                out.append(_Tok("term", i, value=term))
        i = j
    return out


class _Parser:
    def __init__(self, raw: str, tokens: list[_Tok]):
        self.raw = raw
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Tok | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Tok:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> QueryNode:
        node = self.or_expr()
        leftover = self.peek()
        if leftover is not None:
            raise QuerySyntaxError("unexpected trailing operator", leftover.pos)
        return node

    def or_expr(self) -> QueryNode:
        node = self.and_expr()
        while (tok := self.peek()) is not None and tok.kind == "or":
            self.next()
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> QueryNode:
        node = self.unary()
        while (tok := self.peek()) is not None:
            if tok.kind == "and":
                self.next()
                node = And(node, self.unary())
            elif tok.kind in ("term", "wildcard", "near", "not"):
                node = And(node, self.unary())
            else:
                break
        return node

    def unary(self) -> QueryNode:
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("dangling operator", len(self.raw))
        if tok.kind == "not":
            self.next()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> QueryNode:
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("dangling operator", len(self.raw))
        if tok.kind == "term":
            self.next()
            return Term(tok.value)
        if tok.kind == "wildcard":
            self.next()
            return Wildcard(tok.value)
        if tok.kind == "near":
            self.next()
            t1, t2, k = tok.near
            return Near(t1, t2, k)
        raise QuerySyntaxError("dangling operator", tok.pos)


def parse_query(raw: str) -> QueryNode:
    """Parse the full grammar into an AST; raises QuerySyntaxError with the
    character position of the offence."""
    if not raw.strip():
        raise QuerySyntaxError("empty query", 0)
    tokens = _lex(raw)
    if not tokens:
        raise QuerySyntaxError("empty effective query", 0)
    return _Parser(raw, tokens).parse()


def wildcard_regex(pattern: str) -> re.Pattern:
    """Translate a ?/* pattern to an anchored regex: ? is exactly one
    character, * is zero or more."""
    parts = []
    for ch in pattern:
        if ch == "?":
            parts.append(".")
        elif ch == "*":
            parts.append(".*")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts) + r"\Z")


def _min_gap_within(p1: Sequence[int], p2: Sequence[int], k: int) -> bool:
    i = j = 0
    while i < len(p1) and j < len(p2):
        if abs(p1[i] - p2[j]) <= k:
            return True
        if p1[i] < p2[j]:
            i += 1
        else:
            j += 1
    return False


class QueryEngine:
    """Evaluates queries over an immutable pair of indexes.

    Read-only; any number of queries may run concurrently.
    """

    def __init__(
        self,
        preprocessed,
        original,
        lexicon: Lexicon,
        thesaurus: Thesaurus | None = None,
        store=None,
        idf_base: float = 10.0,
    ):
        self.preprocessed = preprocessed
        self.original = original
        self.lexicon = lexicon
        self.thesaurus = thesaurus or Thesaurus.empty()
        self.store = store
        self.idf_base = idf_base

    # -- mode evaluators --------------------------------------------------

    def eval_exact(self, term: str) -> frozenset[str]:
        """Exact match: the term is stemmed with the preprocess lexicon, then
        looked up in the preprocessed index. Unknown terms yield the empty
        set."""
        stemmed = self.lexicon.stem_token(term.lower())
        return frozenset(p.doc_id for p in self.preprocessed.postings_for(stemmed))

    def all_doc_ids(self) -> frozenset[str]:
        return frozenset(self.preprocessed.doc_ids())

    def eval_boolean(self, node: QueryNode) -> frozenset[str]:
        docs, _ = self._eval_node(node)
        return docs

    def _eval_node(self, node: QueryNode) -> tuple[frozenset[str], list[str]]:
        if isinstance(node, Term):
            stemmed = self.lexicon.stem_token(node.token)
            return self.eval_exact(node.token), [stemmed]
        if isinstance(node, And):
            ld, lt = self._eval_node(node.left)
            rd, rt = self._eval_node(node.right)
            return ld & rd, lt + rt
        if isinstance(node, Or):
            ld, lt = self._eval_node(node.left)
            rd, rt = self._eval_node(node.right)
            return ld | rd, lt + rt
        if isinstance(node, Not):
            cd, ct = self._eval_node(node.child)
            return self.all_doc_ids() - cd, ct
        if isinstance(node, Wildcard):
            docs, terms = self.eval_wildcard_with_terms(node.pattern)
            return docs, list(terms)
        if isinstance(node, Near):
            return self.eval_proximity(node.t1, node.t2, node.k), [node.t1, node.t2]
        raise TypeError(f"unknown query node {node!r}")

    def eval_wildcard(self, pattern: str) -> frozenset[str]:
        docs, _ = self.eval_wildcard_with_terms(pattern)
        return docs

    def eval_wildcard_with_terms(self, pattern: str) -> tuple[frozenset[str], tuple[str, ...]]:
        """Match the pattern against the original-index vocabulary
        (lowercased, un-stemmed); the result is the union of postings of
        matching terms."""
        if not re.search(r"[a-z0-9]", pattern):
            raise RejectedQuery(f"pattern {pattern!r} matches the whole vocabulary")
        rx = wildcard_regex(pattern)
        docs: set[str] = set()
        matched: list[str] = []
        for term in self.original.vocabulary():
            if rx.match(term):
                matched.append(term)
                docs.update(p.doc_id for p in self.original.postings_for(term))
        return frozenset(docs), tuple(sorted(matched))

    def eval_proximity(self, t1: str, t2: str, k: int) -> frozenset[str]:
        """Docs where some occurrence of t1 and t2 lie within k token
        positions, via sorted-position merge over the original index.
        Near(t, t, 0) degenerates to docs containing t."""
        if k < 0:
            raise ValueError("proximity distance must be >= 0")
        pos1 = {p.doc_id: p.positions for p in self.original.postings_for(t1.lower())}
        pos2 = {p.doc_id: p.positions for p in self.original.postings_for(t2.lower())}
        hits = [
            doc
            for doc in pos1.keys() & pos2.keys()
            if _min_gap_within(pos1[doc], pos2[doc], k)
        ]
        return frozenset(hits)

    def expand_terms(self, terms: Sequence[str]) -> list[str]:
        """One-hop expansion: the terms themselves plus synonyms, hyponyms
        and coordinate terms; original order first, added terms sorted."""
        out = list(dict.fromkeys(terms))
        extra: set[str] = set()
        for term in terms:
            extra |= self.thesaurus.related(term)
        for term in sorted(extra):
            if term not in out:
                out.append(term)
        return out

    # -- ranking -----------------------------------------------------------

    def score_and_rank(
        self, doc_ids: Iterable[str], terms: Sequence[str]
    ) -> list[RankedResult]:
        """score(d) = sum over terms present in d of tf(t,d) * log(N/n_t),
        read from the preprocessed index; sort by score descending, ties by
        doc id ascending. Terms without postings contribute nothing."""
        terms_u = list(dict.fromkeys(terms))
        tf_maps: dict[str, dict[str, int]] = {}
        idf_vals: dict[str, float] = {}
        for term in terms_u:
            postings = self.preprocessed.postings_for(term)
            if postings:
                idf_vals[term] = idf(term, self.preprocessed, self.idf_base)
                tf_maps[term] = {p.doc_id: p.tf for p in postings}
        results = []
        for doc in doc_ids:
            score = 0.0
            matched = []
            for term in terms_u:
                tf = tf_maps.get(term, {}).get(doc, 0)
                if tf:
                    score += tf * idf_vals[term]
                    matched.append(term)
            results.append(RankedResult(doc, score, tuple(matched)))
        results.sort(key=lambda r: (-r.score, r.doc_id))
        return results

    # -- entry point --------------------------------------------------------

    def exact_terms(self, raw: str) -> list[str]:
        return [self.lexicon.stem_token(t) for t in TOKEN_RE.findall(raw.lower())]

    def search(self, request: QueryRequest) -> list[RankedResult]:
        """Evaluate a request in its mode and return the ranked results.

        exact: union of per-term exact matches (expansion applies here);
        boolean: the operator grammar; wildcard: union over patterns;
        proximity: the quoted-pair form.
        """
        raw = request.raw
        if not raw.strip():
            raise QuerySyntaxError("empty query", 0)

        if request.mode == "exact":
            terms = self.exact_terms(raw)
            if not terms:
                raise QuerySyntaxError("empty effective query", 0)
            if request.effective_expand:
                terms = self.expand_terms(terms)
            docs: set[str] = set()
            for term in terms:
                docs |= self.eval_exact(term)
            return self.score_and_rank(sorted(docs), terms)

        if request.mode == "boolean":
            node = parse_query(raw)
            docs_f, terms = self._eval_node(node)
            return self.score_and_rank(sorted(docs_f), terms)

        if request.mode == "wildcard":
            patterns = []
            for word in raw.split():
                pattern = _WILDCARD_KEEP_RE.sub("", word.lower())
                if pattern:
                    patterns.append(pattern)
            if not patterns:
                raise QuerySyntaxError("empty effective query", 0)
            docs = set()
            terms = []
            for pattern in patterns:
                d, t = self.eval_wildcard_with_terms(pattern)
                docs |= d
                terms.extend(t)
            return self.score_and_rank(sorted(docs), terms)

        # proximity
        node = parse_query(raw)
        if not isinstance(node, Near):
            raise QuerySyntaxError('proximity mode expects "t1 t2"~k', 0)
        docs_f = self.eval_proximity(node.t1, node.t2, node.k)
        return self.score_and_rank(sorted(docs_f), [node.t1, node.t2])

    def fetch_ranked(
        self, ranked: Sequence[RankedResult], workers: int = 1
    ) -> list[FetchedResult]:
        """Fetch articles in rank order; per-doc store misses become error
        placeholders without disturbing the order of the rest."""
        if self.store is None:
            raise RuntimeError("query engine has no store attached")

        def fetch_one(result: RankedResult) -> FetchedResult:
            try:
                return FetchedResult(result, self.store.get_article(result.doc_id))
            except docstore.StoreError as exc:
                return FetchedResult(result, None, f"{type(exc).__name__}: {exc}")

        if workers <= 1 or len(ranked) <= 1:
            return [fetch_one(r) for r in ranked]
        from .pipeline import JobConfig, run_tasks

        results, _ = run_tasks(
            JobConfig(initial_workers=workers, max_workers=workers),
            list(ranked),
            fetch_one,
        )
        return [results[i] for i in range(len(ranked))]
