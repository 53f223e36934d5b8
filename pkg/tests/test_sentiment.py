import numpy as np
import pytest

from threatbench.corpus import EmailEvent, SentimentLexicon, Timestamp, WebEvent
from threatbench.sentiment import monthly_sentiment, normalize, score


def toy(entries):
    return SentimentLexicon(entries)


class TestNormalize:
    def test_lowercase_and_punctuation(self):
        assert normalize("Outstanding!! Work.") == ["outstanding", "work"]

    def test_empty(self):
        assert normalize("") == []

    def test_digit_tokens_removed(self):
        assert normalize("v2 rocket abc123 fine") == ["rocket", "fine"]

    def test_hyphen_splits(self):
        assert normalize("well-known issue") == ["well", "known", "issue"]

    def test_idempotent_on_joined_output(self):
        rng = np.random.default_rng(3)
        words = ["Great!", "bad,", "x9y", "under-paid", "ok"]
        for _ in range(50):
            text = " ".join(rng.choice(words, size=6))
            once = normalize(text)
            assert normalize(" ".join(once)) == once


class TestScore:
    def test_empty_tokens(self):
        assert score([], toy({"good": 3})) == 0

    def test_hand_sum(self):
        lex = toy({"good": 3, "bad": -3})
        assert score(["good", "good", "bad"], lex) == 3

    def test_longest_match_precedence(self):
        lex = toy({"not good": -2, "good": 3})
        assert score(["not", "good"], lex) == -2
        assert score(["good", "not", "good"], lex) == 1

    def test_unmatched_contribute_zero(self):
        lex = toy({"good": 3})
        assert score(["meeting", "good", "agenda"], lex) == 3

    def test_additive_for_single_word_lexicons(self):
        lex = toy({"good": 3, "bad": -3, "win": 4})
        rng = np.random.default_rng(5)
        vocab = ["good", "bad", "win", "meeting", "agenda"]
        for _ in range(100):
            a = list(rng.choice(vocab, size=rng.integers(0, 6)))
            b = list(rng.choice(vocab, size=rng.integers(0, 6)))
            assert score(a + b, lex) == score(a, lex) + score(b, lex)

    def test_bounded_by_five_per_token(self):
        lex = toy({"superb": 5, "tortures": -4})
        rng = np.random.default_rng(6)
        vocab = ["superb", "tortures", "desk"]
        for _ in range(100):
            tokens = list(rng.choice(vocab, size=rng.integers(0, 10)))
            assert abs(score(tokens, lex)) <= 5 * len(tokens)


class TestMonthlySentiment:
    def _email(self, user, when, content):
        return EmailEvent("id", Timestamp.parse(when), user, "PC-1",
                          ["x@dtaa.com"], [], [], f"{user}@dtaa.com",
                          100, 0, content)

    def test_single_event(self, lexicon):
        events = [self._email("u1", "04/02/2010 10:00:00", "outstanding")]
        totals = monthly_sentiment(events, "email", lexicon)
        assert totals == {("u1", 3): 5}

    def test_two_events_same_month(self, lexicon):
        events = [
            self._email("u1", "04/02/2010 10:00:00", "outstanding"),
            self._email("u1", "04/20/2010 10:00:00", "tortures"),
        ]
        totals = monthly_sentiment(events, "email", lexicon)
        assert totals[("u1", 3)] == 1

    def test_absent_user_reads_zero(self, lexicon):
        totals = monthly_sentiment([], "email", lexicon)
        assert totals.get(("ghost", 0), 0) == 0

    def test_kind_filter(self, lexicon):
        web = WebEvent("id", Timestamp.parse("04/02/2010 10:00:00"), "u1",
                       "PC-1", "http://a.example/x", "outstanding")
        assert monthly_sentiment([web], "email", lexicon) == {}
        assert monthly_sentiment([web], "web", lexicon) == {("u1", 3): 5}
