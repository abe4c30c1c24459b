"""Central-route and peripheral-route feature extraction, plus scaling.

Central features read clean_text (the model's view of the message content);
peripheral features read raw_text, because capitalization and punctuation
cues are destroyed by cleaning.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Document
from .errors import EmptyTrainingSetError
from .textstats import (
    Lexicon,
    bundled_sentiment_lexicon,
    bundled_urgency_lexicon,
    count_syllables,
    split_sentences,
    tokenize,
)

FEATURE_NAMES = (
    "flesch_kincaid_grade",
    "vocabulary_richness",
    "sentiment_polarity",
    "text_length",
    "avg_words_per_sentence",
    "exclamation_ratio",
    "question_ratio",
    "capitalization_ratio",
    "all_caps_count",
    "urgency_frequency",
)


@dataclass(frozen=True)
class CentralVector:
    """Message-content measures scrutinized under high elaboration."""

    flesch_kincaid_grade: float
    vocabulary_richness: float
    sentiment_polarity: float
    text_length: int
    avg_words_per_sentence: float

    def values(self) -> tuple[float, ...]:
        return (
            self.flesch_kincaid_grade,
            self.vocabulary_richness,
            self.sentiment_polarity,
            float(self.text_length),
            self.avg_words_per_sentence,
        )


@dataclass(frozen=True)
class PeripheralVector:
    """Surface cues that sway acceptance without deep processing."""

    exclamation_ratio: float
    question_ratio: float
    capitalization_ratio: float
    all_caps_count: int
    urgency_frequency: float

    def values(self) -> tuple[float, ...]:
        return (
            self.exclamation_ratio,
            self.question_ratio,
            self.capitalization_ratio,
            float(self.all_caps_count),
            self.urgency_frequency,
        )


@dataclass(frozen=True)
class ElmVector:
    """The ten dual-route features, in the fixed FEATURE_NAMES order."""

    values: tuple[float, ...]

    feature_names = FEATURE_NAMES

    def __post_init__(self):
        if len(self.values) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} values, got {len(self.values)}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)


class FeatureExtractor:
    """Computes feature vectors for documents with fixed lexicons.

    Immutable after construction; safe for concurrent per-document use.
    """

    def __init__(self, sentiment: Lexicon | None = None, urgency: Lexicon | None = None):
        self.sentiment = sentiment if sentiment is not None else bundled_sentiment_lexicon()
        self.urgency = urgency if urgency is not None else bundled_urgency_lexicon()

    def central(self, doc: Document) -> CentralVector:
        """c1..c5 on clean_text; zero-token documents get all zeros."""
        tokens = tokenize(doc.clean_text)
        words = len(tokens)
        if words == 0:
            return CentralVector(0.0, 0.0, 0.0, 0, 0.0)
        sentences = len(split_sentences(doc.clean_text))
        syllables = sum(count_syllables(t) for t in tokens)
        grade = 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59
        unique = len({t.lower() for t in tokens})
        # Unknown words contribute polarity 0 regardless of the lexicon's
        # configured default.
        polarity = sum(self.sentiment.entries.get(t.lower(), 0.0) for t in tokens) / words
        return CentralVector(
            flesch_kincaid_grade=grade,
            vocabulary_richness=unique / words,
            sentiment_polarity=polarity,
            text_length=words,
            avg_words_per_sentence=words / sentences,
        )

    def peripheral(self, doc: Document) -> PeripheralVector:
        """p1..p5 on raw_text; zero-token documents get all zeros."""
        raw = doc.raw_text
        tokens = tokenize(raw)
        n = len(tokens)
        if n == 0:
            return PeripheralVector(0.0, 0.0, 0.0, 0, 0.0)
        capitalized = sum(1 for t in tokens if t[0].isupper())
        all_caps = sum(1 for t in tokens if len(t) >= 2 and t.isalpha() and t.isupper())
        urgent = sum(1 for t in tokens if t.lower() in self.urgency.entries)
        return PeripheralVector(
            exclamation_ratio=raw.count("!") / n,
            question_ratio=raw.count("?") / n,
            capitalization_ratio=capitalized / n,
            all_caps_count=all_caps,
            urgency_frequency=urgent / n,
        )

    def elm(self, doc: Document) -> ElmVector:
        return ElmVector(self.central(doc).values() + self.peripheral(doc).values())

    def matrix(self, docs: Sequence[Document]) -> np.ndarray:
        """(n_docs, 10) feature matrix in document order."""
        return np.array([self.elm(d).values for d in docs], dtype=np.float64)

    def subjectivity(self, doc: Document) -> float:
        """Fraction of clean-text tokens present in the sentiment lexicon,
        regardless of sign."""
        tokens = tokenize(doc.clean_text)
        if not tokens:
            return 0.0
        return sum(1 for t in tokens if t.lower() in self.sentiment.entries) / len(tokens)


_DEFAULT_EXTRACTOR: FeatureExtractor | None = None


def default_extractor() -> FeatureExtractor:
    global _DEFAULT_EXTRACTOR
    if _DEFAULT_EXTRACTOR is None:
        _DEFAULT_EXTRACTOR = FeatureExtractor()
    return _DEFAULT_EXTRACTOR


def central_features(doc: Document) -> CentralVector:
    """Central-route vector with the bundled lexicons."""
    return default_extractor().central(doc)


def peripheral_features(doc: Document) -> PeripheralVector:
    """Peripheral-route vector with the bundled lexicons."""
    return default_extractor().peripheral(doc)


def elm_vector(doc: Document) -> ElmVector:
    """Combined ten-feature vector with the bundled lexicons."""
    return default_extractor().elm(doc)


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature min-max scaler fitted on training rows only.

    Transforms clamp to [0, 1], so out-of-range test rows cannot leak
    unbounded values into the sigmoid head. Constant features map to 0.
    """

    mins: np.ndarray
    maxs: np.ndarray

    @classmethod
    def fit(cls, rows: np.ndarray) -> "FeatureScaler":
        rows = np.asarray(rows, dtype=np.float64)
        if rows.size == 0 or rows.shape[0] == 0:
            raise EmptyTrainingSetError("cannot fit a scaler on zero rows")
        mins = rows.min(axis=0)
        maxs = rows.max(axis=0)
        constant = maxs <= mins
        maxs = np.where(constant, mins + 1.0, maxs)
        return cls(mins=mins, maxs=maxs)

    @property
    def n_features(self) -> int:
        return self.mins.shape[0]

    def transform(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        scaled = (values - self.mins) / (self.maxs - self.mins)
        return np.clip(scaled, 0.0, 1.0)


def fit_scaler(rows: Sequence[ElmVector]) -> FeatureScaler:
    """Fit min-max bounds over a list of ElmVectors."""
    if not rows:
        raise EmptyTrainingSetError("cannot fit a scaler on zero rows")
    return FeatureScaler.fit(np.array([r.values for r in rows], dtype=np.float64))


def transform(scaler: FeatureScaler, v: ElmVector) -> ElmVector:
    """Scale one ElmVector into [0, 1] per feature."""
    return ElmVector(tuple(scaler.transform(v.as_array()).tolist()))


@dataclass(frozen=True)
class ExtendedFeaturizer:
    """Extra engineered features for the combined variant: presence of the
    top training-fold bigrams (by document frequency) plus a subjectivity
    score. Fitted on training rows only."""

    bigrams: tuple[tuple[str, str], ...]
    extractor: FeatureExtractor

    @classmethod
    def fit(
        cls,
        docs: Sequence[Document],
        extractor: FeatureExtractor,
        top_n: int = 50,
    ) -> "ExtendedFeaturizer":
        if not docs:
            raise EmptyTrainingSetError("cannot fit bigram features on zero documents")
        doc_freq: Counter = Counter()
        for doc in docs:
            doc_freq.update(set(_bigrams(doc)))
        ranked = sorted(doc_freq.items(), key=lambda kv: (-kv[1], kv[0]))
        top = tuple(bg for bg, _ in ranked[:top_n])
        return cls(bigrams=top, extractor=extractor)

    @property
    def n_features(self) -> int:
        return len(self.bigrams) + 1

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f"bigram:{a}_{b}" for a, b in self.bigrams) + ("subjectivity",)

    def vector(self, doc: Document) -> np.ndarray:
        present = set(_bigrams(doc))
        out = np.zeros(self.n_features, dtype=np.float64)
        for i, bg in enumerate(self.bigrams):
            if bg in present:
                out[i] = 1.0
        out[-1] = self.extractor.subjectivity(doc)
        return out

    def matrix(self, docs: Sequence[Document]) -> np.ndarray:
        return np.array([self.vector(d) for d in docs], dtype=np.float64)


def _bigrams(doc: Document) -> list[tuple[str, str]]:
    tokens = [t.lower() for t in tokenize(doc.clean_text)]
    return list(zip(tokens, tokens[1:]))
