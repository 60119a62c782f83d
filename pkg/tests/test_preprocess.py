import pytest
from hypothesis import given
from hypothesis import strategies as st

from pressindex.docstore import DocStore
from pressindex.model import make_article
from pressindex.preprocess import (
    Lexicon,
    ResourceFormatError,
    StopList,
    TokenStream,
    load_default_lexicon,
    load_default_stoplist,
    preprocess_article,
    preprocess_text,
    remove_stopwords,
    stem,
    tokenize,
)


class TestTokenize:
    def test_punctuation_and_symbols_split(self):
        stream = tokenize("Iraq's war, 2003!")
        assert list(stream.tokens) == ["iraq", "s", "war", "2003"]
        assert stream.word_count == 4

    def test_empty_text(self):
        stream = tokenize("")
        assert stream.tokens == ()
        assert stream.word_count == 0

    def test_non_ascii_letters_separate(self):
        assert list(tokenize("café résumé").tokens) == ["caf", "r", "sum"]

    def test_large_text_count_matches_independent_counter(self):
        # ~1 MB of synthetic article text, counted by a hand-rolled walker
        import random

        rng = random.Random(3)
        words = ["War", "peace-talks", "2003", "Iraq's", "declared!", "x" * 9]
        text = " ".join(rng.choice(words) for _ in range(150_000))
        assert len(text) > 1_000_000

        def independent_count(s: str) -> int:
            count = 0
            inside = False
            for ch in s.lower():
                if ("a" <= ch <= "z") or ("0" <= ch <= "9"):
                    if not inside:
                        count += 1
                        inside = True
                else:
                    inside = False
            return count

        assert tokenize(text).word_count == independent_count(text)

    @given(st.text(max_size=300))
    def test_output_alphabet(self, text):
        for tok in tokenize(text).tokens:
            assert tok
            assert all(("a" <= c <= "z") or ("0" <= c <= "9") for c in tok)


class TestStopwords:
    def test_removal_preserves_order_and_count(self):
        stoplist = StopList(frozenset({"the", "a", "s"}))
        stream = remove_stopwords(TokenStream(("the", "war"), 2), stoplist)
        assert list(stream.tokens) == ["war"]
        assert stream.word_count == 2  # count is pre-removal

    def test_all_stopwords(self):
        stoplist = StopList(frozenset({"the", "a"}))
        stream = remove_stopwords(TokenStream(("the", "a", "the"), 3), stoplist)
        assert stream.tokens == ()

    def test_output_is_subsequence(self):
        stoplist = StopList(frozenset({"b", "d"}))
        tokens = ("a", "b", "c", "d", "e", "b")
        out = remove_stopwords(TokenStream(tokens, 6), stoplist).tokens
        it = iter(tokens)
        assert all(any(t == x for x in it) for t in out)

    def test_stoplist_charset_enforced(self):
        with pytest.raises(ResourceFormatError):
            StopList(frozenset({"Bad!"}))

    def test_stoplist_file_parsing(self, tmp_path):
        f = tmp_path / "stop.txt"
        f.write_text("# comment\nthe\na  # trailing comment\n\ns\n")
        sl = StopList.load(f)
        assert "the" in sl and "a" in sl and "s" in sl
        assert len(sl) == 3


class TestStem:
    def test_mapping_applied(self):
        lex = Lexicon({"killed": "kill", "kill": "kill"})
        assert list(stem(TokenStream(("killed",), 1), lex).tokens) == ["kill"]

    def test_unknown_words_pass_through(self):
        lex = Lexicon({"killed": "kill"})
        out = stem(TokenStream(("obama", "2003"), 2), lex)
        assert list(out.tokens) == ["obama", "2003"]

    def test_idempotent_with_identity_entries(self):
        lex = Lexicon({"killed": "kill", "kill": "kill"})
        once = stem(TokenStream(("killed", "kill", "x"), 3), lex)
        twice = stem(once, lex)
        assert once.tokens == twice.tokens

    def test_length_preserved(self):
        lex = Lexicon({"wars": "war"})
        out = stem(TokenStream(("wars", "wars", "q"), 3), lex)
        assert len(out.tokens) == 3

    def test_lexicon_file_parsing(self, tmp_path):
        f = tmp_path / "lex.tsv"
        f.write_text("killed\tkill\nkill\tkill\n")
        lex = Lexicon.load(f)
        assert lex.stem_token("killed") == "kill"
        bad = tmp_path / "bad.tsv"
        bad.write_text("one two three\n")
        with pytest.raises(ResourceFormatError):
            Lexicon.load(bad)


class TestComposition:
    def test_full_stage(self):
        stoplist = StopList(frozenset({"the", "many"}))
        lex = Lexicon({"killed": "kill", "kill": "kill"})
        art = make_article(
            uri="http://x/1", title="x", date="2003-01-01", body="The war killed many."
        )
        # title "x" is not a stopword, so expect it first
        tokens = preprocess_article(art, stoplist, lex)
        assert tokens == ["x", "war", "kill"]

    def test_empty_body(self):
        stoplist = StopList(frozenset())
        lex = Lexicon({})
        stream = preprocess_text("", stoplist, lex)
        assert stream.tokens == ()

    def test_persists_through_store(self, tmp_path):
        store = DocStore.open(tmp_path / "s")
        stoplist = StopList(frozenset({"the"}))
        lex = Lexicon({"killed": "kill"})
        art = make_article(
            uri="http://x/2", title="War", date="2003-01-01", body="The war killed."
        )
        tokens = preprocess_article(art, stoplist, lex, store)
        assert store.get_tokens(art.id) == tokens == ["war", "war", "kill"]

    @given(st.text(max_size=200))
    def test_output_tokens_always_storable(self, text):
        stoplist = load_default_stoplist()
        lex = load_default_lexicon()
        from pressindex.docstore import serialize_tokens

        tokens = list(preprocess_text(text, stoplist, lex).tokens)
        serialize_tokens(tokens)  # must never raise


class TestDefaultResources:
    def test_lexicon_size_and_idempotence(self):
        lex = load_default_lexicon()
        assert len(lex) >= 2000
        for form, lemma in lex.mapping.items():
            assert lex.mapping.get(lemma, lemma) == lemma

    def test_stoplist_has_possessive_artifact(self):
        sl = load_default_stoplist()
        assert "s" in sl
        assert "the" in sl
        # kept retrievable for query expansion evaluation
        assert "out" not in sl
