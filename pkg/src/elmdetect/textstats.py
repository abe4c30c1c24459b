"""Deterministic linguistic primitives: tokens, sentences, syllables, lexicons.

Everything here is a pure function of its input, so the feature extractors
built on top are safe to call from concurrent workers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterator, Mapping

from .errors import MalformedLineError

# A token is a maximal run of letters, digits, or apostrophes ("don't" stays
# one token). Underscore is excluded on purpose: it is a special character.
_TOKEN_RE = re.compile(r"(?:[^\W_]|')+", re.UNICODE)

# A sentence boundary is the end of a run of terminators, so "Wait... what?!"
# splits into exactly two segments.
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])(?![.!?])")

_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


@dataclass(frozen=True)
class TokenList:
    """Tokens plus their character offsets into the source text."""

    tokens: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __getitem__(self, i: int) -> str:
        return self.tokens[i]


def tokenize(text: str) -> TokenList:
    """Split text into tokens, preserving casing; callers lowercase as needed."""
    tokens = []
    spans = []
    for m in _TOKEN_RE.finditer(text):
        tokens.append(m.group())
        spans.append((m.start(), m.end()))
    return TokenList(tuple(tokens), tuple(spans))


def split_sentences(text: str) -> list[str]:
    """Split into sentences ended by '.', '!' or '?'.

    Runs of terminators count once, and a trailing unterminated segment that
    still contains a token counts as one sentence. Segments without any token
    (e.g. stray punctuation) are dropped.
    """
    segments = _SENTENCE_SPLIT_RE.split(text)
    return [s.strip() for s in segments if _TOKEN_RE.search(s)]


def count_syllables(word: str) -> int:
    """Heuristic syllable count: vowel groups, minus a terminal silent 'e'.

    Lowercases the word, counts maximal groups of a/e/i/o/u/y, subtracts one
    for a trailing 'e' when the result stays >= 1, and floors at 1. Within one
    syllable of dictionary counts for most common English words.
    """
    w = word.lower()
    n = len(_VOWEL_GROUP_RE.findall(w))
    if w.endswith("e") and n >= 2:
        n -= 1
    return max(1, n)


@dataclass(frozen=True)
class Lexicon:
    """Case-insensitive word -> score mapping with a default for absent words."""

    name: str
    entries: Mapping[str, float]
    default_score: float = 0.0

    def score(self, word: str) -> float:
        return self.entries.get(word.lower(), self.default_score)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def load_lexicon(path, name: str | None = None, default_score: float = 0.0) -> Lexicon:
    """Load a `word<TAB>score` lexicon file.

    The score is optional (defaults to 1.0), `#` starts a comment, keys are
    case-folded, and on duplicates the last entry wins.
    """
    entries: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split("\t")
            if len(parts) == 1:
                word, score = parts[0], 1.0
            elif len(parts) == 2:
                word = parts[0]
                try:
                    score = float(parts[1])
                except ValueError as exc:
                    raise MalformedLineError(
                        f"{path}:{lineno}: not a number: {parts[1]!r}"
                    ) from exc
            else:
                raise MalformedLineError(f"{path}:{lineno}: expected 'word<TAB>score'")
            word = word.strip().lower()
            if not word:
                raise MalformedLineError(f"{path}:{lineno}: empty word")
            entries[word] = score
    return Lexicon(name or str(path), entries, default_score)


@lru_cache(maxsize=None)
def bundled_sentiment_lexicon() -> Lexicon:
    """Word-polarity lexicon shipped with the package, scores in [-1, 1]."""
    return _load_bundled("sentiment_lexicon.tsv", "bundled-sentiment")


@lru_cache(maxsize=None)
def bundled_urgency_lexicon() -> Lexicon:
    """Urgency-cue word list shipped with the package, all scores 1.0."""
    return _load_bundled("urgency_lexicon.tsv", "bundled-urgency")


def _load_bundled(filename: str, name: str) -> Lexicon:
    ref = resources.files("elmdetect").joinpath("data").joinpath(filename)
    with resources.as_file(ref) as path:
        return load_lexicon(path, name=name)
