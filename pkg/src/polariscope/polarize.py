"""Polarization metrics: kNN party ratios, cross-party word ranks, era
drift, and attention top-percentile words.

The candidate ratio is same-party-neighbors / k with 0.5 as the unpolarized
baseline; self never counts as a neighbor and minor-party members are
filtered from neighbor lists (they are excluded from the ratio either way).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .ann import ANNIndex, Neighbor, exact_knn, query
from .corpus import Party, PartyKind
from .embed.training import W2VModel
from .embed.vectors import AttentionRecord, EmbeddingSet

BASELINE_RATIO = 0.5
HISTOGRAM_BUCKETS = 10


class InsufficientPopulationError(ValueError):
    """Fewer eligible neighbors than the requested k."""


class OOVError(ValueError):
    """Word absent from every requested vocabulary."""


class EmptyRecordError(ValueError):
    """Attention record with no usable tokens."""


@dataclass(frozen=True)
class PolarizationScore:
    politician_id: str
    dataset_kind: Optional[str]
    k: int
    neighbor_ids: tuple[str, ...]
    neighbor_parties: tuple[str, ...]  # PartyKind values, ordered by rank
    neighbor_scores: tuple[float, ...]
    same_party_count: int
    ratio: float
    baseline: float = BASELINE_RATIO

    def __post_init__(self) -> None:
        if len(self.neighbor_parties) != self.k:
            raise ValueError("neighbor list length must equal k")
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError("ratio must lie in [0, 1]")

    @property
    def democrat_fraction(self) -> float:
        """The paper's alternative democrat/total view of the same neighbors."""
        dem = sum(1 for p in self.neighbor_parties if p == PartyKind.DEMOCRATIC.value)
        return dem / self.k


def eligible_neighbors(
    index: ANNIndex,
    politician_id: str,
    k: int,
    party_of: Mapping[str, Party],
    search_k: Optional[int] = None,
) -> list[Neighbor]:
    """Top-k neighbors of a candidate, excluding self and minor parties."""
    row = index.row_of(politician_id)  # raises QueryError for unknown ids
    population = sum(
        1
        for item in index.ids
        if item != politician_id and item in party_of and party_of[item].is_major
    )
    if population < k:
        raise InsufficientPopulationError(
            f"only {population} eligible neighbors for {politician_id!r}, need {k}"
        )
    q = index.matrix[row]
    kk = k + 1
    while True:
        results = query(index, q, kk, search_k=search_k)
        filtered = [
            n
            for n in results
            if n.id != politician_id and n.id in party_of and party_of[n.id].is_major
        ]
        if len(filtered) >= k or kk >= len(index):
            return filtered[:k]
        kk = min(len(index), kk * 2)


def candidate_polarization(
    index: ANNIndex,
    politician_id: str,
    k: int,
    party_of: Mapping[str, Party],
    dataset_kind: Optional[str] = None,
    search_k: Optional[int] = None,
) -> PolarizationScore:
    """Fraction of the k nearest eligible neighbors sharing the candidate's party."""
    neighbors = eligible_neighbors(index, politician_id, k, party_of, search_k)
    own = party_of[politician_id].kind
    parties = tuple(party_of[n.id].kind.value for n in neighbors)
    same = sum(1 for p in parties if p == own.value)
    return PolarizationScore(
        politician_id=politician_id,
        dataset_kind=dataset_kind,
        k=k,
        neighbor_ids=tuple(n.id for n in neighbors),
        neighbor_parties=parties,
        neighbor_scores=tuple(n.score for n in neighbors),
        same_party_count=same,
        ratio=same / k,
    )


# --------------------------------------------------------------------------
# Word neighbors
# --------------------------------------------------------------------------

WordSource = Union[W2VModel, EmbeddingSet]


def _word_set(source: WordSource) -> EmbeddingSet:
    if isinstance(source, W2VModel):
        return source.word_embedding_set(normalized=True)
    return source if source.normalized else source.normalize()


def word_neighbors(source: WordSource, word: str, k: int) -> list[Neighbor]:
    """Top-k cosine neighbors of a word; rank 1 is the word itself."""
    emb = _word_set(source)
    if word not in emb:
        raise OOVError(f"{word!r} not in vocabulary")
    return exact_knn(emb, emb.vector(word), k)


@dataclass
class WordNeighborReport:
    word: str
    corpus_tag: str
    k: int
    neighbors: list[Neighbor] = field(default_factory=list)
    probe_ranks: dict[str, Optional[int]] = field(default_factory=dict)
    oov: bool = False


def _full_rank(emb: EmbeddingSet, word: str, probe: str) -> Optional[int]:
    if probe not in emb:
        return None
    ordered = exact_knn(emb, emb.vector(word), len(emb))
    for rank, neighbor in enumerate(ordered, 1):
        if neighbor.id == probe:
            return rank
    return None


def word_neighbor_ranks(
    sources: Mapping[str, WordSource],
    word: str,
    probes: Sequence[str] = (),
    k: int = 15,
) -> dict[str, WordNeighborReport]:
    """Per-corpus neighbor lists for a word plus ranks of probe tokens.

    A corpus where the word is out of vocabulary yields a partial report
    with the oov flag set.
    """
    reports: dict[str, WordNeighborReport] = {}
    for tag, source in sources.items():
        emb = _word_set(source)
        if word not in emb:
            reports[tag] = WordNeighborReport(
                word=word, corpus_tag=tag, k=k, oov=True,
                probe_ranks={p: None for p in probes},
            )
            continue
        neighbors = exact_knn(emb, emb.vector(word), min(k, len(emb)))
        ranks = {p: _full_rank(emb, word, p) for p in probes}
        reports[tag] = WordNeighborReport(
            word=word, corpus_tag=tag, k=k, neighbors=neighbors, probe_ranks=ranks
        )
    return reports


@dataclass
class EraDriftReport:
    word: str
    party_tag: str
    phases: dict[int, Optional[list[Neighbor]]]  # phase index -> neighbors or None


def era_drift(
    phase_sources: Mapping[int, WordSource],
    word: str,
    k: int = 15,
    party_tag: str = "",
    all_phases: Sequence[int] = (1, 2, 3, 4),
) -> EraDriftReport:
    """Neighbor lists of a word per chronological phase; missing cells are None."""
    phases: dict[int, Optional[list[Neighbor]]] = {}
    found = False
    for phase in sorted(all_phases):
        source = phase_sources.get(phase)
        if source is None:
            phases[phase] = None
            continue
        emb = _word_set(source)
        if word not in emb:
            phases[phase] = None
            continue
        phases[phase] = exact_knn(emb, emb.vector(word), min(k, len(emb)))
        found = True
    if not found:
        raise OOVError(f"{word!r} absent from every phase vocabulary")
    return EraDriftReport(word=word, party_tag=party_tag, phases=phases)


# --------------------------------------------------------------------------
# Attention percentile words
# --------------------------------------------------------------------------

_SPECIAL_PREFIX = "<"


@dataclass
class AttentionTopWords:
    politician_id: str
    percentile: float
    threshold: float
    selected: list[tuple[str, float]]  # (token, max score), descending score


def nearest_rank_threshold(scores: Sequence[float], percentile: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest score."""
    if not 0 < percentile < 100:
        raise ValueError("percentile must be strictly between 0 and 100")
    ordered = sorted(scores)
    rank = math.ceil(percentile * len(ordered) / 100.0)
    return ordered[max(rank, 1) - 1]


def attention_top_words(
    record: AttentionRecord, percentile: float = 90.0
) -> AttentionTopWords:
    """Tokens at or above the nearest-rank percentile of attention scores.

    Special/mask tokens ("<s>", "<pad>", ...) are excluded before the
    percentile is computed; duplicate surface tokens keep their max score.
    """
    if not record.tokens:
        raise EmptyRecordError(f"{record.politician_id}: no tokens")
    pairs = [
        (tok, score)
        for tok, score in zip(record.tokens, record.scores)
        if not tok.startswith(_SPECIAL_PREFIX)
    ]
    if not pairs:
        raise EmptyRecordError(f"{record.politician_id}: only special tokens present")
    threshold = nearest_rank_threshold([s for _, s in pairs], percentile)
    best: dict[str, float] = {}
    for tok, score in pairs:
        if score >= threshold and score > best.get(tok, float("-inf")):
            best[tok] = score
    selected = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    return AttentionTopWords(
        politician_id=record.politician_id,
        percentile=percentile,
        threshold=float(threshold),
        selected=selected,
    )


# --------------------------------------------------------------------------
# Cohort aggregation
# --------------------------------------------------------------------------

@dataclass
class CohortSummary:
    group: str
    count: int
    mean_ratio: float
    histogram: list[int]  # 10 buckets [0,0.1) .. [0.9,1.0]


def cohort_summary(
    scores: Sequence[PolarizationScore],
    group_of: Optional[Callable[[PolarizationScore], object]] = None,
) -> list[CohortSummary]:
    """Aggregate ratios per group: mean, count, and fixed histogram buckets."""
    if not scores:
        raise ValueError("no scores to summarize")
    if group_of is None:
        group_of = lambda s: "all"  # noqa: E731
    groups: dict[str, list[float]] = {}
    for score in scores:
        groups.setdefault(str(group_of(score)), []).append(score.ratio)
    out = []
    for group in sorted(groups):
        ratios = groups[group]
        hist = [0] * HISTOGRAM_BUCKETS
        for r in ratios:
            hist[min(HISTOGRAM_BUCKETS - 1, int(r * HISTOGRAM_BUCKETS))] += 1
        out.append(
            CohortSummary(
                group=group,
                count=len(ratios),
                mean_ratio=float(np.mean(ratios)),
                histogram=hist,
            )
        )
    return out
