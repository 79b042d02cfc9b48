"""Tokenization and vocabulary construction for embedding training.

The tokenizer is fixed here on purpose: classification, word neighbors and
polarization all depend on tokens being produced the same way everywhere.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Negative-sampling distribution uses counts raised to this power.
UNIGRAM_POWER = 0.75


class EmptyVocabError(ValueError):
    """No token survived min_count filtering."""


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace/punctuation tokenizer shared by the whole pipeline."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Vocab:
    tokens: tuple[str, ...]  # id -> token, ordered by (-count, token)
    counts: np.ndarray  # int64 per id
    total_tokens: int  # sum of retained counts
    min_count: int
    subsample_threshold: float
    keep_probs: np.ndarray = field(repr=False, default=None)  # float64 per id
    cum_unigram: np.ndarray = field(repr=False, default=None)  # float64 cumulative
    index: dict[str, int] = field(repr=False, default=None)

    def __post_init__(self) -> None:
        if self.index is None:
            self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if self.keep_probs is None:
            self.keep_probs = _keep_probs(
                self.counts, self.total_tokens, self.subsample_threshold
            )
        if self.cum_unigram is None:
            self.cum_unigram = _cum_unigram(self.counts)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def encode(self, tokens: Iterable[str]) -> np.ndarray:
        """Map tokens to ids, dropping out-of-vocabulary tokens."""
        ids = [self.index[t] for t in tokens if t in self.index]
        return np.asarray(ids, dtype=np.int32)

    def unigram_probs(self) -> np.ndarray:
        return np.diff(self.cum_unigram, prepend=0.0)


def _keep_probs(counts: np.ndarray, total: int, threshold: float) -> np.ndarray:
    if threshold <= 0:
        return np.ones(len(counts), dtype=np.float64)
    freq = counts.astype(np.float64) / total
    ratio = threshold / freq
    return np.minimum(1.0, np.sqrt(ratio) + ratio)


def _cum_unigram(counts: np.ndarray) -> np.ndarray:
    weights = counts.astype(np.float64) ** UNIGRAM_POWER
    cum = np.cumsum(weights / weights.sum())
    cum[-1] = 1.0
    return cum


def build_vocab(
    corpus: Iterable[Sequence[str]],
    min_count: int = 5,
    subsample_threshold: float = 1e-4,
) -> Vocab:
    """Count tokens across the corpus and build the training vocabulary."""
    counts: dict[str, int] = {}
    for doc in corpus:
        for token in doc:
            counts[token] = counts.get(token, 0) + 1
    retained = sorted(
        ((tok, n) for tok, n in counts.items() if n >= min_count),
        key=lambda kv: (-kv[1], kv[0]),
    )
    if not retained:
        raise EmptyVocabError(
            f"no token occurs at least {min_count} times in the corpus"
        )
    tokens = tuple(tok for tok, _ in retained)
    count_arr = np.asarray([n for _, n in retained], dtype=np.int64)
    return Vocab(
        tokens=tokens,
        counts=count_arr,
        total_tokens=int(count_arr.sum()),
        min_count=min_count,
        subsample_threshold=subsample_threshold,
    )
