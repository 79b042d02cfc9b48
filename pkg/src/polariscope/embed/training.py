"""Word2Vec (skip-gram negative sampling) and Doc2Vec (paragraph vector)
training built on the selectable kernels.

Single-worker training is bit-reproducible for a fixed seed. Multi-worker
training shards documents across threads that update the shared matrices
without locking (standard asynchronous SGD for embeddings); it trades
determinism for speed and is never used by tests that pin values.
"""
from __future__ import annotations

import hashlib
import json
import logging
import threading
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import kernels
from ..kernels import _pure
from .vocab import Vocab, build_vocab
from .vectors import DatasetKind, EmbeddingSet, Provenance

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_INFER_SALT = 0xD0C


@dataclass(frozen=True)
class W2VConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 20
    initial_lr: float = 0.025
    min_lr: float = 1e-4
    seed: int = 1
    workers: int = 1
    min_count: int = 5
    subsample: float = 1e-4
    dtype: str = "float32"  # float64 forces the pure kernel (used by gradient checks)

    def __post_init__(self) -> None:
        if self.dim < 1 or self.window < 1 or self.negatives < 1 or self.epochs < 1:
            raise ValueError("dim, window, negatives and epochs must all be >= 1")
        if not 0 < self.min_lr <= self.initial_lr:
            raise ValueError("need 0 < min_lr <= initial_lr")

    def fingerprint(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class D2VConfig(W2VConfig):
    mode: str = "pv-dm"  # or "pv-dbow"
    infer_epochs: int = 50

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.mode not in ("pv-dm", "pv-dbow"):
            raise ValueError(f"unknown doc2vec mode {self.mode!r}")


def _impl_for(config: W2VConfig):
    # The compiled kernel is float32-only; float64 models go through the
    # NumPy path, which is dtype-generic.
    if config.dtype == "float32":
        return kernels
    return _pure


def _init_matrix(rng: np.random.RandomState, rows: int, dim: int, dtype: str) -> np.ndarray:
    return ((rng.rand(rows, dim) - 0.5) / dim).astype(dtype)


@dataclass
class W2VModel:
    vocab: Vocab
    config: W2VConfig
    input_vectors: np.ndarray  # (V, dim)
    output_vectors: np.ndarray  # (V, dim)
    epoch_losses: list[float] = field(default_factory=list)

    def vector(self, token: str) -> np.ndarray:
        return self.input_vectors[self.vocab.index[token]]

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def word_embedding_set(
        self, normalized: bool = True, dataset_kind: Optional[DatasetKind] = None
    ) -> EmbeddingSet:
        emb = EmbeddingSet(
            ids=self.vocab.tokens,
            matrix=self.input_vectors.astype(np.float32),
            normalized=False,
            provenance=Provenance.TRAINED_W2V,
            dataset_kind=dataset_kind,
        )
        return emb.normalize() if normalized else emb


@dataclass
class D2VModel:
    vocab: Vocab
    config: D2VConfig
    doc_ids: tuple[str, ...]
    doc_vectors: np.ndarray  # (D, dim)
    word_input: np.ndarray
    word_output: np.ndarray
    epoch_losses: list[float] = field(default_factory=list)
    empty_docs: list[str] = field(default_factory=list)
    dataset_kind: Optional[DatasetKind] = None

    def doc_vector(self, doc_id: str) -> np.ndarray:
        return self.doc_vectors[self.doc_ids.index(doc_id)]

    def doc_embedding_set(self, normalized: bool = True) -> EmbeddingSet:
        emb = EmbeddingSet(
            ids=self.doc_ids,
            matrix=self.doc_vectors.astype(np.float32),
            normalized=False,
            provenance=Provenance.TRAINED_D2V,
            dataset_kind=self.dataset_kind,
        )
        return emb.normalize() if normalized else emb


class _AlphaSchedule:
    """Linear decay from initial_lr to min_lr over all planned token passes."""

    def __init__(self, config: W2VConfig, total_tokens: int):
        self.initial = config.initial_lr
        self.floor = config.min_lr
        self.total = max(1, total_tokens * config.epochs)
        self.processed = 0

    def current(self) -> float:
        frac = min(1.0, self.processed / self.total)
        return max(self.floor, self.initial - (self.initial - self.floor) * frac)


def _run_epochs(impl, tables, encoded, config: W2VConfig, step_fn):
    """Common epoch loop; step_fn(doc, alpha, state) -> (loss, pairs, state)."""
    schedule = _AlphaSchedule(config, sum(len(d) for d in encoded))
    state = config.seed & _MASK64
    epoch_losses = []
    lock = threading.Lock()

    for _ in range(config.epochs):
        loss_sum = 0.0
        pair_sum = 0
        if config.workers <= 1:
            for doc in encoded:
                if not len(doc):
                    continue
                loss, pairs, state = step_fn(doc, schedule.current(), state)
                schedule.processed += len(doc)
                loss_sum += loss
                pair_sum += pairs
        else:
            shards = [encoded[w :: config.workers] for w in range(config.workers)]
            results = [None] * config.workers

            def work(w: int) -> None:
                nonlocal loss_sum, pair_sum
                wstate = (config.seed + 0x9E3779B97F4A7C15 * (w + 1)) & _MASK64
                local_loss, local_pairs = 0.0, 0
                for doc in shards[w]:
                    if not len(doc):
                        continue
                    loss, pairs, wstate = step_fn(doc, schedule.current(), wstate)
                    schedule.processed += len(doc)  # racy by design
                    local_loss += loss
                    local_pairs += pairs
                with lock:
                    loss_sum += local_loss
                    pair_sum += local_pairs

            threads = [threading.Thread(target=work, args=(w,)) for w in range(config.workers)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        epoch_losses.append(loss_sum / max(1, pair_sum))
    return epoch_losses


def train_word2vec(corpus: Sequence[Sequence[str]], config: W2VConfig) -> W2VModel:
    """Train skip-gram negative-sampling word vectors from a tokenized corpus."""
    vocab = build_vocab(corpus, config.min_count, config.subsample)
    impl = _impl_for(config)
    tables = impl.make_tables(vocab.cum_unigram, vocab.keep_probs)
    rng = np.random.RandomState(config.seed)
    w_in = _init_matrix(rng, len(vocab), config.dim, config.dtype)
    w_out = np.zeros((len(vocab), config.dim), dtype=config.dtype)
    encoded = [vocab.encode(doc) for doc in corpus]

    def step(doc, alpha, state):
        return impl.train_document_sg(
            w_in, w_out, doc, config.window, config.negatives, alpha, tables, state
        )

    epoch_losses = _run_epochs(impl, tables, encoded, config, step)
    return W2VModel(
        vocab=vocab,
        config=config,
        input_vectors=w_in,
        output_vectors=w_out,
        epoch_losses=epoch_losses,
    )


def train_doc2vec(
    corpus: Sequence[tuple[str, Sequence[str]]],
    config: D2VConfig,
    dataset_kind: Optional[DatasetKind] = None,
) -> D2VModel:
    """Train paragraph vectors (PV-DM-mean or PV-DBOW) over (id, tokens) pairs."""
    if not corpus:
        raise ValueError("doc2vec needs at least one document")
    doc_ids = tuple(doc_id for doc_id, _ in corpus)
    if len(set(doc_ids)) != len(doc_ids):
        raise ValueError("duplicate document ids in corpus")
    vocab = build_vocab((tokens for _, tokens in corpus), config.min_count, config.subsample)
    impl = _impl_for(config)
    tables = impl.make_tables(vocab.cum_unigram, vocab.keep_probs)
    rng = np.random.RandomState(config.seed)
    w_in = _init_matrix(rng, len(vocab), config.dim, config.dtype)
    d_in = _init_matrix(rng, len(doc_ids), config.dim, config.dtype)
    w_out = np.zeros((len(vocab), config.dim), dtype=config.dtype)
    encoded = [vocab.encode(tokens) for _, tokens in corpus]
    empty_docs = [doc_ids[i] for i, doc in enumerate(encoded) if not len(doc)]
    if empty_docs:
        logger.warning(
            "%d document(s) have no in-vocabulary tokens; their vectors stay "
            "at initialization: %s",
            len(empty_docs),
            empty_docs[:5],
        )

    rows = {id(doc): i for i, doc in enumerate(encoded)}

    def step(doc, alpha, state):
        row = rows[id(doc)]
        if config.mode == "pv-dm":
            return impl.train_document_dm(
                w_in, w_out, d_in, row, doc, config.window,
                config.negatives, alpha, tables, state,
            )
        return impl.train_document_dbow(
            w_out, d_in, row, doc, config.negatives, alpha, tables, state
        )

    epoch_losses = _run_epochs(impl, tables, encoded, config, step)
    return D2VModel(
        vocab=vocab,
        config=config,
        doc_ids=doc_ids,
        doc_vectors=d_in,
        word_input=w_in,
        word_output=w_out,
        epoch_losses=epoch_losses,
        empty_docs=empty_docs,
        dataset_kind=dataset_kind,
    )


def infer_doc_vector(model: D2VModel, tokens: Sequence[str]) -> np.ndarray:
    """Embed a held-out document against frozen word matrices."""
    config = model.config
    rng = np.random.RandomState((config.seed + _INFER_SALT) & 0x7FFFFFFF)
    d_in = _init_matrix(rng, 1, config.dim, config.dtype)
    encoded = model.vocab.encode(tokens)
    if not len(encoded):
        if len(tokens):
            logger.warning("all %d tokens are out of vocabulary; returning the "
                           "initialization vector", len(tokens))
        return d_in[0]
    impl = _impl_for(config)
    tables = impl.make_tables(model.vocab.cum_unigram, model.vocab.keep_probs)
    state = (config.seed ^ _INFER_SALT) & _MASK64
    for epoch in range(config.infer_epochs):
        frac = epoch / max(1, config.infer_epochs)
        alpha = max(config.min_lr, config.initial_lr - (config.initial_lr - config.min_lr) * frac)
        if config.mode == "pv-dm":
            _, _, state = impl.train_document_dm(
                model.word_input, model.word_output, d_in, 0, encoded,
                config.window, config.negatives, alpha, tables, state,
                update_words=False, update_out=False, update_doc=True,
            )
        else:
            _, _, state = impl.train_document_dbow(
                model.word_output, d_in, 0, encoded, config.negatives,
                alpha, tables, state, update_out=False, update_doc=True,
            )
    return d_in[0]


# Single-pair operations; these run the same update code as the pure kernel
# and work on float64 matrices, which is what the finite-difference gradient
# checks exercise.

def sgns_step(
    model: W2VModel, center: int, context: int, negatives: Sequence[int], lr: float
) -> float:
    """Apply one skip-gram negative-sampling update; returns the pre-update loss."""
    return _pure.sgns_pair(
        model.input_vectors, model.output_vectors, center, context, list(negatives), lr
    )


def pvdm_step(
    model: D2VModel,
    doc_row: int,
    context: Sequence[int],
    center: int,
    negatives: Sequence[int],
    lr: float,
) -> float:
    """Apply one PV-DM-mean update; returns the pre-update loss."""
    return _pure.pvdm_pair(
        model.word_input,
        model.word_output,
        model.doc_vectors,
        doc_row,
        list(context),
        center,
        list(negatives),
        lr,
    )
