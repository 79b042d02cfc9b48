import math

import numpy as np
import pytest

from polariscope.ann import (
    ANNIndex,
    IndexBuildError,
    IndexFormatError,
    QueryError,
    _Internal,
    _Leaf,
    build_index,
    exact_knn,
    load_index,
    measure_recall,
    query,
    save_index,
)
from polariscope.embed import DatasetKind, EmbeddingSet, Provenance


def embedding_set(matrix, ids=None, normalized=False) -> EmbeddingSet:
    matrix = np.asarray(matrix, dtype=np.float32)
    if ids is None:
        ids = tuple(f"item-{i:04d}" for i in range(len(matrix)))
    emb = EmbeddingSet(
        ids=tuple(ids),
        matrix=matrix,
        normalized=normalized,
        provenance=Provenance.EXTERNAL,
        dataset_kind=DatasetKind.POLITICAL,
    )
    return emb if normalized else emb.normalize()


def random_unit_set(n=200, dim=12, seed=0) -> EmbeddingSet:
    rng = np.random.default_rng(seed)
    return embedding_set(rng.normal(size=(n, dim)))


def leaves_of(node):
    if isinstance(node, _Leaf):
        return [node]
    return leaves_of(node.left) + leaves_of(node.right)


class TestBuildIndex:
    def test_single_item_forest_is_all_leaves(self):
        emb = embedding_set([[1.0, 0.0]])
        index = build_index(emb, n_trees=5, seed=1)
        for tree in index.trees:
            assert isinstance(tree, _Leaf)
            assert tree.items.tolist() == [0]

    def test_leaves_partition_items_and_respect_capacity(self):
        emb = random_unit_set(n=100)
        index = build_index(emb, n_trees=10, leaf_capacity=32, seed=3)
        for tree in index.trees:
            leaves = leaves_of(tree)
            sizes = [len(l.items) for l in leaves]
            assert max(sizes) <= 32
            all_items = sorted(i for l in leaves for i in l.items.tolist())
            assert all_items == list(range(100))

    def test_deterministic_given_seed(self):
        emb = random_unit_set()
        a = build_index(emb, n_trees=4, seed=9)
        b = build_index(emb, n_trees=4, seed=9)

        def structure(node):
            if isinstance(node, _Leaf):
                return ("leaf", tuple(node.items.tolist()))
            return ("internal", node.offset, structure(node.left), structure(node.right))

        assert [structure(t) for t in a.trees] == [structure(t) for t in b.trees]

    def test_empty_set_rejected(self):
        emb = EmbeddingSet(ids=(), matrix=np.zeros((0, 4), np.float32), normalized=True,
                           provenance=Provenance.EXTERNAL)
        with pytest.raises(IndexBuildError):
            build_index(emb)

    def test_unnormalized_rejected(self):
        emb = EmbeddingSet(ids=("a",), matrix=np.array([[2.0, 0.0]], np.float32),
                           normalized=False, provenance=Provenance.EXTERNAL)
        with pytest.raises(IndexBuildError):
            build_index(emb)

    def test_duplicate_vectors_fall_back_to_arbitrary_halving(self):
        matrix = np.tile(np.array([[1.0, 0.0]], np.float32), (80, 1))
        emb = embedding_set(matrix)
        index = build_index(emb, n_trees=2, leaf_capacity=16, seed=0)
        for tree in index.trees:
            sizes = [len(l.items) for l in leaves_of(tree)]
            assert max(sizes) <= 16
            assert sum(sizes) == 80


class TestQuery:
    def test_self_query_rank_one(self):
        emb = random_unit_set()
        index = build_index(emb, seed=2)
        result = query(index, emb.matrix[17], k=3)
        assert result[0].id == "item-0017"
        assert result[0].score == pytest.approx(1.0, abs=1e-6)

    def test_planted_angles_order(self):
        angles = [0.0, math.radians(10), math.radians(90)]
        matrix = [[math.cos(a), math.sin(a)] for a in angles]
        emb = embedding_set(matrix, ids=["deg0", "deg10", "deg90"], )
        index = build_index(emb, n_trees=5, seed=1)
        result = query(index, np.array([1.0, 0.0]), k=2)
        assert [n.id for n in result] == ["deg0", "deg10"]
        assert result[0].score == pytest.approx(1.0, abs=1e-6)
        assert result[1].score == pytest.approx(math.cos(math.radians(10)), abs=1e-6)

    def test_search_k_covering_all_items_equals_exact(self):
        emb = random_unit_set(n=150, dim=8, seed=5)
        index = build_index(emb, n_trees=6, seed=5)
        rng = np.random.default_rng(0)
        for _ in range(20):
            q = rng.normal(size=8)
            approx = query(index, q, k=10, search_k=len(emb))
            exact = exact_knn(emb, q, k=10)
            assert approx == exact  # ids, order, and scores all identical

    def test_dim_mismatch(self):
        emb = random_unit_set(dim=8)
        index = build_index(emb, seed=1)
        with pytest.raises(QueryError):
            query(index, np.ones(5), k=1)
        with pytest.raises(QueryError):
            exact_knn(emb, np.ones(5), k=1)

    def test_zero_query_rejected(self):
        emb = random_unit_set(dim=4)
        index = build_index(emb, seed=1)
        with pytest.raises(QueryError):
            query(index, np.zeros(4), k=1)

    def test_scores_in_bounds_and_strictly_ordered(self):
        emb = random_unit_set(n=300, dim=6, seed=8)
        index = build_index(emb, n_trees=8, seed=8)
        result = query(index, np.ones(6), k=25)
        for n in result:
            assert -1 - 1e-6 <= n.score <= 1 + 1e-6
        for a, b in zip(result, result[1:]):
            assert (a.score, b.id) > (b.score, a.id) or a.score > b.score or (
                a.score == b.score and a.id < b.id
            )

    def test_tie_break_by_id_ascending(self):
        matrix = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], np.float32)
        emb = embedding_set(matrix, ids=["zeta", "alpha", "mid"])
        index = build_index(emb, n_trees=3, seed=0)
        result = query(index, np.array([1.0, 0.0]), k=2)
        assert [n.id for n in result] == ["alpha", "zeta"]


class TestRecall:
    def test_full_budget_recall_is_one(self):
        emb = random_unit_set(n=120, dim=10, seed=2)
        index = build_index(emb, n_trees=4, seed=2)
        recall = measure_recall(index, emb, k=10, sample_size=30, seed=1,
                                search_k=len(emb))
        assert recall == 1.0

    def test_default_budget_recall_high(self):
        emb = random_unit_set(n=400, dim=25, seed=3)
        index = build_index(emb, n_trees=50, seed=3)
        recall = measure_recall(index, emb, k=10, sample_size=40, seed=1)
        assert recall >= 0.95

    def test_single_starved_tree_worse_than_forest(self):
        emb = random_unit_set(n=400, dim=25, seed=3)
        starved = build_index(emb, n_trees=1, seed=3)
        forest = build_index(emb, n_trees=50, seed=3)
        r_starved = measure_recall(starved, emb, k=10, sample_size=40, seed=1, search_k=12)
        r_forest = measure_recall(forest, emb, k=10, sample_size=40, seed=1)
        assert r_starved < r_forest

    def test_sample_size_bounds(self):
        emb = random_unit_set(n=10)
        index = build_index(emb, seed=1)
        with pytest.raises(ValueError):
            measure_recall(index, emb, k=2, sample_size=11)


class TestSnapshot:
    def test_roundtrip_identical_queries(self, tmp_path):
        emb = random_unit_set(n=150, dim=9, seed=4)
        index = build_index(emb, n_trees=7, leaf_capacity=8, seed=4)
        path = tmp_path / "index.pann"
        save_index(index, path)
        loaded = load_index(path)
        assert loaded.ids == index.ids
        assert np.array_equal(loaded.matrix, index.matrix)
        rng = np.random.default_rng(0)
        for _ in range(10):
            q = rng.normal(size=9)
            assert query(loaded, q, k=7) == query(index, q, k=7)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bogus.pann"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(IndexFormatError, match="magic"):
            load_index(path)

    def test_future_version_rejected(self, tmp_path):
        emb = random_unit_set(n=5, dim=3, seed=1)
        index = build_index(emb, n_trees=1, seed=1)
        path = tmp_path / "index.pann"
        save_index(index, path)
        data = bytearray(path.read_bytes())
        data[4] = 99  # bump version field
        path.write_bytes(bytes(data))
        with pytest.raises(IndexFormatError, match="version"):
            load_index(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        emb = random_unit_set(n=5, dim=3, seed=1)
        index = build_index(emb, n_trees=1, seed=1)
        path = tmp_path / "index.pann"
        save_index(index, path)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(IndexFormatError, match="trailing"):
            load_index(path)
