"""Text normalization and signed lexicon scoring.

Normalization lowers case, removes numbers and punctuation, and keeps only
alphabetic tokens.  Scoring does a greedy longest-phrase match against the
lexicon and sums the matched valences; per-user monthly totals are plain
sums over matching events.
"""

from __future__ import annotations

import re

from .corpus import EmailEvent, WebEvent

# Hyphens split words in two; all other punctuation is deleted outright.
_HYPHENS = re.compile(r"-+")
_PUNCT = re.compile(r"[^\w\s]|_")
_HAS_DIGIT = re.compile(r"\d")
# already-normalized text (the overwhelmingly common case in bulk logs)
_PLAIN = re.compile(r"[a-z ]*\Z")


def normalize(text):
    """Tokenize to lowercase alphabetic words; digit-bearing tokens dropped."""
    if _PLAIN.match(text):
        return text.split()
    cleaned = _PUNCT.sub("", _HYPHENS.sub(" ", text.lower()))
    return [t for t in cleaned.split() if not _HAS_DIGIT.search(t)]


def score(tokens, lexicon):
    """Sum of lexicon valences under greedy longest-match, left to right."""
    total = 0
    i = 0
    n = len(tokens)
    max_words = lexicon.max_words
    phrase_starts = lexicon.phrase_starts
    get = lexicon._map.get
    while i < n:
        tok = tokens[i]
        if tok in phrase_starts and max_words > 1:
            matched = False
            for length in range(min(max_words, n - i), 1, -1):
                valence = get(" ".join(tokens[i:i + length]))
                if valence is not None:
                    total += valence
                    i += length
                    matched = True
                    break
            if matched:
                continue
        valence = get(tok)
        if valence is not None:
            total += valence
        i += 1
    return total


_KIND_CONTENT = {"web": WebEvent, "email": EmailEvent}


def monthly_sentiment(events, kind, lexicon):
    """Per (user, month index) sum of event content scores for one kind.

    Returns a plain dict; pairs with no matching events are simply absent,
    so callers should read it with ``.get(key, 0)``.
    """
    cls = _KIND_CONTENT[kind]
    totals = {}
    for event in events:
        if not isinstance(event, cls):
            continue
        value = score(normalize(event.content), lexicon)
        if value == 0:
            continue
        key = (event.user, event.date.month_index())
        totals[key] = totals.get(key, 0) + value
    return totals
