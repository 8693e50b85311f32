import random

import pytest

from phraseattack.errors import EmptyText, SpanOutOfRange
from phraseattack.text import (
    Span,
    apply_fill,
    blank_span,
    choose_attack_segment,
    detokenize,
    mask_span,
    sentence_around,
    slice_span,
    split_sentences,
    tokenize,
)


class TestTokenize:
    def test_whitespace_split(self):
        assert tokenize("the dog runs") == ("the", "dog", "runs")

    def test_edge_punctuation_becomes_tokens(self):
        assert tokenize("good, cheap!") == ("good", ",", "cheap", "!")

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyText):
            tokenize("")
        with pytest.raises(EmptyText):
            tokenize("   \t\n")

    def test_internal_punctuation_stays(self):
        assert tokenize("don't pay 4.50 for so-so soup") == ("don't", "pay", "4.50", "for", "so-so", "soup")

    def test_quoted_word(self):
        assert tokenize('"fine" (really)') == ('"', "fine", '"', "(", "really", ")")

    def test_nfc_normalization(self):
        composed = "café"
        decomposed = "café"
        assert tokenize(decomposed) == tokenize(composed) == (composed,)

    def test_roundtrip_for_atomic_tokens(self):
        rng = random.Random(13)
        words = ["alpha", "beta", "Gamma", "don't", "8.26", ",", ".", "!", "x"]
        for _ in range(200):
            tokens = tuple(rng.choice(words) for _ in range(rng.randint(1, 12)))
            assert tokenize(detokenize(tokens)) == tokens


class TestChooseAttackSegment:
    def test_single_segment(self):
        assert choose_attack_segment((("a",),)) == 0

    def test_longer_wins(self):
        assert choose_attack_segment((("a",) * 5, ("b",) * 12)) == 1
        assert choose_attack_segment((("a",) * 12, ("b",) * 5)) == 0

    def test_tie_goes_to_second(self):
        assert choose_attack_segment((("a",) * 7, ("b",) * 7)) == 1


class TestApplyFill:
    def test_splice(self):
        assert apply_fill(("a", "b", "c"), Span(1, 1), ("X", "Y")) == ("a", "X", "Y", "c")

    def test_full_replacement(self):
        assert apply_fill(("a", "b", "c"), Span(0, 2), ("Z",)) == ("Z",)

    def test_out_of_range(self):
        with pytest.raises(SpanOutOfRange):
            apply_fill(("a",), Span(0, 3), ("Z",))

    def test_identity_fill(self):
        x = ("u", "v", "w", "z")
        for start in range(len(x)):
            for end in range(start, len(x)):
                span = Span(start, end)
                assert apply_fill(x, span, slice_span(x, span)) == x

    def test_context_preserved_and_input_unchanged(self):
        rng = random.Random(99)
        vocab = list("abcdefgh")
        for _ in range(300):
            n = rng.randint(1, 15)
            x = tuple(rng.choice(vocab) for _ in range(n))
            start = rng.randrange(n)
            end = rng.randrange(start, n)
            fill = tuple(rng.choice(vocab) for _ in range(rng.randint(1, 5)))
            before = x
            out = apply_fill(x, Span(start, end), fill)
            assert x == before
            assert len(out) == n - (end - start + 1) + len(fill)
            assert out[:start] == x[:start]
            assert out[start + len(fill) :] == x[end + 1 :]


class TestSpanHelpers:
    def test_mask_span(self):
        assert mask_span(("a", "b", "c"), Span(0, 1), "[MASK]") == ("[MASK]", "[MASK]", "c")

    def test_blank_span(self):
        assert blank_span(("a", "b", "c", "d"), Span(1, 2)) == (("a",), ("d",))

    def test_span_validation(self):
        with pytest.raises(ValueError):
            Span(2, 1)
        with pytest.raises(ValueError):
            Span(-1, 0)


class TestSentences:
    def test_split_on_period_before_capital(self):
        x = tokenize("the soup was cold . The bread was fine .")
        assert split_sentences(x) == [Span(0, 4), Span(5, 9)]

    def test_no_split_before_lowercase(self):
        x = tokenize("approx . four items")
        assert split_sentences(x) == [Span(0, 3)]

    def test_trailing_without_terminator(self):
        x = tokenize("one two three")
        assert split_sentences(x) == [Span(0, 2)]

    def test_sentence_around_picks_covering_sentence(self):
        x = tokenize("the soup was cold . The bread was fine .")
        assert sentence_around(x, Span(6, 6)) == Span(5, 9)
        assert sentence_around(x, Span(0, 1)) == Span(0, 4)

    def test_sentence_around_straddling_span(self):
        x = tokenize("bad . Good start")
        assert sentence_around(x, Span(1, 2)) == Span(0, 3)
