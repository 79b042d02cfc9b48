"""Party classification over embedding sets.

Two routes mirror the evaluation tables: 2-means clustering scored by the
best cluster-to-party bijection, and a binary linear SVM trained with the
Pegasos subgradient schedule. Only Democratic/Republican members enter;
everything is deterministic given the recorded seeds.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .corpus import Party, PartyKind
from .embed.vectors import DatasetKind, EmbeddingSet

D_LABEL = 1  # Democratic
R_LABEL = -1  # Republican


class SplitError(ValueError):
    pass


class FitError(ValueError):
    pass


@dataclass
class LabeledSet:
    embeddings: EmbeddingSet
    labels: dict[str, int]  # id -> +1 (D) / -1 (R)
    dataset_kind: Optional[DatasetKind] = None

    def __post_init__(self) -> None:
        missing = [i for i in self.embeddings.ids if i not in self.labels]
        if missing:
            raise ValueError(f"unlabeled ids: {missing[:5]}")
        values = set(self.labels[i] for i in self.embeddings.ids)
        if values != {D_LABEL, R_LABEL}:
            raise ValueError("both classes must be present")

    def __len__(self) -> int:
        return len(self.embeddings)

    @property
    def ids(self) -> tuple[str, ...]:
        return self.embeddings.ids

    def label_array(self) -> np.ndarray:
        return np.asarray([self.labels[i] for i in self.ids], dtype=np.float64)

    def matrix(self) -> np.ndarray:
        return self.embeddings.matrix.astype(np.float64)

    def subset(self, ids: Sequence[str]) -> "LabeledSet":
        rows = [self.embeddings.index[i] for i in ids]
        emb = EmbeddingSet(
            ids=tuple(ids),
            matrix=self.embeddings.matrix[rows],
            normalized=self.embeddings.normalized,
            provenance=self.embeddings.provenance,
            dataset_kind=self.embeddings.dataset_kind,
        )
        return LabeledSet(
            embeddings=emb,
            labels={i: self.labels[i] for i in ids},
            dataset_kind=self.dataset_kind,
        )


def labeled_set(
    embeddings: EmbeddingSet, party_of: Mapping[str, Party]
) -> LabeledSet:
    """Restrict an embedding set to major-party members and attach labels."""
    keep = []
    labels = {}
    for item in embeddings.ids:
        party = party_of.get(item)
        if party is None or not party.is_major:
            continue
        keep.append(item)
        labels[item] = D_LABEL if party.kind is PartyKind.DEMOCRATIC else R_LABEL
    rows = [embeddings.index[i] for i in keep]
    emb = EmbeddingSet(
        ids=tuple(keep),
        matrix=embeddings.matrix[rows],
        normalized=embeddings.normalized,
        provenance=embeddings.provenance,
        dataset_kind=embeddings.dataset_kind,
    )
    return LabeledSet(embeddings=emb, labels=labels, dataset_kind=embeddings.dataset_kind)


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")

    def fingerprint(self) -> str:
        payload = f"{self.train_fraction}:{self.seed}:{self.stratified}"
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def stratified_split(data: LabeledSet, cfg: SplitConfig) -> tuple[LabeledSet, LabeledSet]:
    """Deterministic per-class split preserving proportions within one item."""
    rng = np.random.default_rng(cfg.seed)
    classes: dict[int, list[str]] = {D_LABEL: [], R_LABEL: []}
    for item in data.ids:
        classes[data.labels[item]].append(item)
    train_ids: list[str] = []
    test_ids: list[str] = []
    groups = classes.values() if cfg.stratified else [[i for c in classes.values() for i in c]]
    for members in groups:
        if len(members) < 2:
            raise SplitError(
                f"class with {len(members)} member(s) cannot be split; need >= 2"
            )
        order = list(members)
        rng.shuffle(order)
        n_train = min(len(order) - 1, max(1, round(cfg.train_fraction * len(order))))
        train_ids.extend(order[:n_train])
        test_ids.extend(order[n_train:])
    return data.subset(sorted(train_ids)), data.subset(sorted(test_ids))


# --------------------------------------------------------------------------
# k-means
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KMeansConfig:
    k: int = 2
    max_iter: int = 100
    tol: float = 1e-6  # relative centroid movement
    seed: int = 0
    restarts: int = 10

    def fingerprint(self) -> str:
        payload = json.dumps([self.k, self.max_iter, self.tol, self.seed, self.restarts])
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centroids = np.empty((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[rng.integers(n)]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        probs = d2 / d2.sum() if d2.sum() > 0 else np.full(n, 1.0 / n)
        pick = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
        centroids[j] = X[min(pick, n - 1)]
        d2 = np.minimum(d2, ((X - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd(
    X: np.ndarray, centroids: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """Lloyd iterations with empty-cluster repair; returns inertia history."""
    k = len(centroids)
    history: list[float] = []
    assignments = np.zeros(len(X), dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assignments = d2.argmin(axis=1)
        point_d2 = d2[np.arange(len(X)), assignments]
        for j in range(k):
            if not (assignments == j).any():
                thief = int(point_d2.argmax())
                assignments[thief] = j
                centroids[j] = X[thief]
                point_d2[thief] = 0.0
        history.append(float(point_d2.sum()))
        new_centroids = np.stack(
            [X[assignments == j].mean(axis=0) for j in range(k)]
        )
        movement = np.linalg.norm(new_centroids - centroids, axis=1)
        scale = np.linalg.norm(centroids, axis=1) + 1e-12
        centroids = new_centroids
        if (movement / scale).max() <= tol:
            break
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assignments = d2.argmin(axis=1)
    inertia = float(d2[np.arange(len(X)), assignments].sum())
    history.append(inertia)
    return centroids, assignments, inertia, history


def kmeans_fit(
    vectors: np.ndarray, cfg: KMeansConfig = KMeansConfig()
) -> tuple[np.ndarray, np.ndarray, float]:
    """Best-of-restarts k-means++ / Lloyd; returns (centroids, assignments, inertia)."""
    X = np.asarray(vectors, dtype=np.float64)
    if len(np.unique(X, axis=0)) < cfg.k:
        raise FitError(f"need at least {cfg.k} distinct points")
    best: Optional[tuple[np.ndarray, np.ndarray, float]] = None
    for restart in range(cfg.restarts):
        rng = np.random.default_rng((cfg.seed, restart))
        init = _kmeanspp_init(X, cfg.k, rng)
        centroids, assignments, inertia, _ = _lloyd(X, init, cfg.max_iter, cfg.tol)
        if best is None or inertia < best[2]:
            best = (centroids, assignments, inertia)
    return best


class ClusterAccuracy(NamedTuple):
    accuracy: float
    mapping: dict  # cluster id -> party label


def cluster_accuracy(assignments: np.ndarray, labels: np.ndarray) -> ClusterAccuracy:
    """Accuracy maximized over the two cluster-to-party bijections."""
    assignments = np.asarray(assignments)
    labels = np.asarray(labels)
    if len(assignments) != len(labels):
        raise ValueError("one assignment per labeled point required")
    forward = float(
        np.mean(np.where(assignments == 0, D_LABEL, R_LABEL) == labels)
    )
    backward = float(
        np.mean(np.where(assignments == 0, R_LABEL, D_LABEL) == labels)
    )
    if forward >= backward:
        return ClusterAccuracy(forward, {0: D_LABEL, 1: R_LABEL})
    return ClusterAccuracy(backward, {0: R_LABEL, 1: D_LABEL})


# --------------------------------------------------------------------------
# Linear SVM (Pegasos)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SVMConfig:
    lam: float = 1e-4  # regularization
    epochs: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError("lam must be > 0")

    def fingerprint(self) -> str:
        payload = json.dumps([self.lam, self.epochs, self.seed])
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass
class SVMModel:
    weights: np.ndarray
    bias: float
    config: SVMConfig
    objective_history: list[float] = field(default_factory=list)

    def decision(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        # sign(0) counts as the positive class
        return np.where(self.decision(X) >= 0, D_LABEL, R_LABEL)


def svm_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, lam: float) -> float:
    margins = y * (X @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins).mean()
    return float(0.5 * lam * (w @ w) + hinge)


def svm_train(train: LabeledSet, cfg: SVMConfig = SVMConfig()) -> SVMModel:
    """Pegasos-style primal subgradient descent on the hinge objective."""
    X = train.matrix()
    y = train.label_array()
    n, dim = X.shape
    w = np.zeros(dim, dtype=np.float64)
    b = 0.0
    rng = np.random.default_rng(cfg.seed)
    t = 0
    history = [svm_objective(w, b, X, y, cfg.lam)]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (cfg.lam * t)
            margin = y[i] * (X[i] @ w + b)
            w *= 1.0 - eta * cfg.lam
            if margin < 1.0:
                w += (eta * y[i]) * X[i]
                b += eta * y[i]
        history.append(svm_objective(w, b, X, y, cfg.lam))
    return SVMModel(weights=w, bias=b, config=cfg, objective_history=history)


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

@dataclass
class EvalReport:
    model_name: str
    dataset_kind: Optional[str]
    accuracy: float
    confusion: dict[str, int]  # tp/fn/fp/tn with Democratic as positive
    split_fingerprint: str = ""
    config_fingerprint: str = ""

    def as_dict(self) -> dict:
        return {
            "model": self.model_name,
            "dataset_kind": self.dataset_kind,
            "accuracy": self.accuracy,
            "confusion": self.confusion,
            "split_fingerprint": self.split_fingerprint,
            "config_fingerprint": self.config_fingerprint,
        }


def evaluate(
    model: SVMModel,
    test: LabeledSet,
    model_name: str = "svm",
    split_fingerprint: str = "",
) -> EvalReport:
    X = test.matrix()
    if X.shape[1] != len(model.weights):
        raise ValueError(
            f"model dim {len(model.weights)} != test dim {X.shape[1]}"
        )
    y = test.label_array()
    preds = model.predict(X)
    tp = int(((preds == D_LABEL) & (y == D_LABEL)).sum())
    fn = int(((preds == R_LABEL) & (y == D_LABEL)).sum())
    fp = int(((preds == D_LABEL) & (y == R_LABEL)).sum())
    tn = int(((preds == R_LABEL) & (y == R_LABEL)).sum())
    accuracy = (tp + tn) / len(y)
    return EvalReport(
        model_name=model_name,
        dataset_kind=test.dataset_kind.value if test.dataset_kind else None,
        accuracy=float(accuracy),
        confusion={"tp": tp, "fn": fn, "fp": fp, "tn": tn},
        split_fingerprint=split_fingerprint,
        config_fingerprint=model.config.fingerprint(),
    )
