"""Approximate nearest neighbors: a random-projection tree forest.

Each tree splits on the perpendicular bisector of two randomly chosen
items; queries run a best-first traversal over all trees keyed by margin
distance, then re-rank the collected candidates with exact cosine. With a
candidate budget covering the whole set, query() is element-for-element
equal to exact_knn() - that equivalence is the correctness oracle.
"""
from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .embed.vectors import EmbeddingSet

PANN_MAGIC = b"PANN"
PANN_VERSION = 1

DEFAULT_TREES = 50
DEFAULT_LEAF_CAPACITY = 32


class IndexBuildError(ValueError):
    pass


class QueryError(ValueError):
    pass


class IndexFormatError(ValueError):
    pass


class Neighbor(NamedTuple):
    id: str
    score: float  # cosine similarity


@dataclass
class _Internal:
    normal: np.ndarray  # float32 (dim,)
    offset: float
    left: "_Node"  # side with normal . x - offset >= 0
    right: "_Node"


@dataclass
class _Leaf:
    items: np.ndarray  # int32 indices


_Node = Union[_Internal, _Leaf]


@dataclass
class ANNIndex:
    ids: tuple[str, ...]
    matrix: np.ndarray  # (N, dim) float32, normalized
    trees: list[_Node]
    leaf_capacity: int
    seed: int

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def __post_init__(self) -> None:
        self._index = {item: i for i, item in enumerate(self.ids)}

    def row_of(self, item: str) -> int:
        try:
            return self._index[item]
        except KeyError:
            raise QueryError(f"id {item!r} not in index") from None

    def vector_of(self, item: str) -> np.ndarray:
        return self.matrix[self.row_of(item)]


def _build_tree(
    matrix: np.ndarray, items: np.ndarray, leaf_capacity: int, rng: np.random.Generator
) -> _Node:
    def build(idx: np.ndarray) -> _Node:
        if len(idx) <= leaf_capacity:
            return _Leaf(items=np.sort(idx).astype(np.int32))
        for _ in range(4):  # initial attempt + 3 retries
            a, b = rng.choice(len(idx), size=2, replace=False)
            va, vb = matrix[idx[a]], matrix[idx[b]]
            normal = va - vb
            norm = float(np.linalg.norm(normal.astype(np.float64)))
            if norm < 1e-12:
                continue
            normal = (normal.astype(np.float64) / norm).astype(np.float32)
            offset = float(normal.astype(np.float64) @ ((va + vb).astype(np.float64) / 2.0))
            side = matrix[idx].astype(np.float64) @ normal.astype(np.float64) - offset >= 0
            if side.all() or not side.any():
                continue
            return _Internal(
                normal=normal,
                offset=offset,
                left=build(idx[side]),
                right=build(idx[~side]),
            )
        # Degenerate region (e.g. all duplicates): arbitrary halving with a
        # zero hyperplane so traversal still reaches both sides.
        half = len(idx) // 2
        return _Internal(
            normal=np.zeros(matrix.shape[1], dtype=np.float32),
            offset=0.0,
            left=build(idx[:half]),
            right=build(idx[half:]),
        )

    return build(items)


def build_index(
    emb: EmbeddingSet,
    n_trees: int = DEFAULT_TREES,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    seed: int = 0,
) -> ANNIndex:
    """Build a deterministic RP forest over a normalized embedding set."""
    if len(emb) == 0:
        raise IndexBuildError("cannot index an empty embedding set")
    if not emb.normalized:
        raise IndexBuildError("embedding set must be normalized before indexing")
    if n_trees < 1 or leaf_capacity < 1:
        raise IndexBuildError("n_trees and leaf_capacity must be >= 1")
    all_items = np.arange(len(emb), dtype=np.int64)
    seeds = np.random.SeedSequence(seed).spawn(n_trees)
    trees = [
        _build_tree(emb.matrix, all_items, leaf_capacity, np.random.Generator(np.random.PCG64(s)))
        for s in seeds
    ]
    return ANNIndex(
        ids=tuple(emb.ids),
        matrix=emb.matrix,
        trees=trees,
        leaf_capacity=leaf_capacity,
        seed=seed,
    )


def _normalize_query(q: np.ndarray, dim: int) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != dim:
        raise QueryError(f"query dim {q.shape[0]} != index dim {dim}")
    norm = float(np.linalg.norm(q))
    if norm == 0.0:
        raise QueryError("cannot query with a zero vector")
    return q / norm


def _rank(
    ids: Sequence[str], matrix: np.ndarray, indices: np.ndarray, qn: np.ndarray, k: int
) -> list[Neighbor]:
    """Exact cosine re-rank of candidate rows; ties break by id ascending."""
    scores = matrix[indices].astype(np.float64) @ qn
    order = sorted(range(len(indices)), key=lambda i: (-scores[i], ids[indices[i]]))
    return [Neighbor(id=ids[indices[i]], score=float(scores[i])) for i in order[:k]]


def query(
    index: ANNIndex, q: np.ndarray, k: int, search_k: Optional[int] = None
) -> list[Neighbor]:
    """Top-k neighbors via best-first forest traversal plus exact re-rank."""
    if k < 1:
        raise QueryError("k must be >= 1")
    qn = _normalize_query(q, index.dim)
    if search_k is None:
        search_k = index.n_trees * k
    budget = min(max(search_k, k), len(index))

    heap: list[tuple[float, int, _Node]] = []
    counter = 0
    for root in index.trees:
        heapq.heappush(heap, (float("-inf"), counter, root))  # -priority
        counter += 1
    candidates: set[int] = set()
    while heap and len(candidates) < budget:
        neg_priority, _, node = heapq.heappop(heap)
        priority = -neg_priority
        if isinstance(node, _Leaf):
            candidates.update(node.items.tolist())
            continue
        margin = float(node.normal.astype(np.float64) @ qn) - node.offset
        heapq.heappush(heap, (-min(priority, margin), counter, node.left))
        counter += 1
        heapq.heappush(heap, (-min(priority, -margin), counter, node.right))
        counter += 1
    indices = np.asarray(sorted(candidates), dtype=np.int64)
    return _rank(index.ids, index.matrix, indices, qn, k)


def exact_knn(emb: EmbeddingSet, q: np.ndarray, k: int) -> list[Neighbor]:
    """Full-scan exact cosine top-k with the same sort and tie rules as query()."""
    if k < 1:
        raise QueryError("k must be >= 1")
    qn = _normalize_query(q, emb.dim)
    indices = np.arange(len(emb), dtype=np.int64)
    return _rank(emb.ids, emb.matrix, indices, qn, k)


def measure_recall(
    index: ANNIndex,
    emb: EmbeddingSet,
    k: int,
    sample_size: int,
    seed: int = 0,
    search_k: Optional[int] = None,
) -> float:
    """Mean overlap between approximate and exact top-k over sampled queries."""
    if sample_size > len(emb):
        raise ValueError("sample_size exceeds item count")
    rng = np.random.default_rng(seed)
    sample = rng.choice(len(emb), size=sample_size, replace=False)
    total = 0.0
    for row in sample:
        q = emb.matrix[row]
        approx = {n.id for n in query(index, q, k, search_k=search_k)}
        exact = {n.id for n in exact_knn(emb, q, k)}
        total += len(approx & exact) / k
    return total / sample_size


# --------------------------------------------------------------------------
# Snapshot format ("PANN")
# --------------------------------------------------------------------------

def save_index(index: ANNIndex, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(PANN_MAGIC)
        fh.write(
            struct.pack(
                "<IIIqQIB",
                PANN_VERSION,
                index.n_trees,
                index.leaf_capacity,
                index.seed,
                len(index),
                index.dim,
                0,  # metric: cosine
            )
        )
        for item in index.ids:
            raw = item.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(index.matrix.astype("<f4").tobytes())
        for root in index.trees:
            _write_tree(fh, root)


def _write_tree(fh, root: _Node) -> None:
    stack = [root]
    while stack:
        node = stack.pop()
        if isinstance(node, _Leaf):
            fh.write(struct.pack("<BI", 1, len(node.items)))
            fh.write(node.items.astype("<u4").tobytes())
        else:
            fh.write(struct.pack("<B", 0))
            fh.write(node.normal.astype("<f4").tobytes())
            fh.write(struct.pack("<d", node.offset))
            stack.append(node.right)  # pre-order: left subtree first
            stack.append(node.left)


def load_index(path: Union[str, Path]) -> ANNIndex:
    data = Path(path).read_bytes()
    if data[:4] != PANN_MAGIC:
        raise IndexFormatError(f"{path}: bad magic {data[:4]!r}")
    header = struct.Struct("<IIIqQIB")
    if len(data) < 4 + header.size:
        raise IndexFormatError(f"{path}: truncated header")
    version, n_trees, leaf_capacity, seed, count, dim, metric = header.unpack_from(data, 4)
    if version > PANN_VERSION:
        raise IndexFormatError(
            f"{path}: format version {version} is newer than supported {PANN_VERSION}"
        )
    if metric != 0:
        raise IndexFormatError(f"{path}: unknown metric code {metric}")
    pos = 4 + header.size
    ids = []
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        ids.append(data[pos : pos + id_len].decode("utf-8"))
        pos += id_len
    matrix = np.frombuffer(data, dtype="<f4", count=count * dim, offset=pos).reshape(
        count, dim
    ).copy()
    pos += 4 * count * dim
    trees = []
    for _ in range(n_trees):
        tree, pos = _read_tree(data, pos, dim, path)
        trees.append(tree)
    if pos != len(data):
        raise IndexFormatError(f"{path}: {len(data) - pos} trailing bytes")
    return ANNIndex(
        ids=tuple(ids), matrix=matrix, trees=trees, leaf_capacity=leaf_capacity, seed=seed
    )


def _read_tree(data: bytes, pos: int, dim: int, path) -> tuple[_Node, int]:
    def read_node(pos: int) -> tuple[_Node, int]:
        if pos >= len(data):
            raise IndexFormatError(f"{path}: truncated tree data")
        tag = data[pos]
        pos += 1
        if tag == 1:
            (n,) = struct.unpack_from("<I", data, pos)
            pos += 4
            items = np.frombuffer(data, dtype="<u4", count=n, offset=pos).astype(np.int32)
            return _Leaf(items=items), pos + 4 * n
        if tag != 0:
            raise IndexFormatError(f"{path}: unknown node tag {tag}")
        normal = np.frombuffer(data, dtype="<f4", count=dim, offset=pos).copy()
        pos += 4 * dim
        (offset,) = struct.unpack_from("<d", data, pos)
        pos += 8
        left, pos = read_node(pos)
        right, pos = read_node(pos)
        return _Internal(normal=normal, offset=offset, left=left, right=right), pos

    return read_node(pos)
