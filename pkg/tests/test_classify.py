import itertools

import numpy as np
import pytest

from polariscope.classify import (
    D_LABEL,
    FitError,
    KMeansConfig,
    LabeledSet,
    R_LABEL,
    SplitConfig,
    SplitError,
    SVMConfig,
    _kmeanspp_init,
    _lloyd,
    cluster_accuracy,
    evaluate,
    kmeans_fit,
    labeled_set,
    stratified_split,
    svm_objective,
    svm_train,
)
from polariscope.corpus import DEMOCRATIC, Party, PartyKind, REPUBLICAN
from polariscope.embed import DatasetKind, EmbeddingSet, Provenance


def make_labeled(n_dem=10, n_rep=10, dim=4, seed=0, dem_center=1.0, rep_center=-1.0):
    rng = np.random.default_rng(seed)
    ids = []
    labels = {}
    rows = []
    for i in range(n_dem):
        ids.append(f"d{i:03d}")
        labels[ids[-1]] = D_LABEL
        rows.append(rng.normal(dem_center, 0.5, dim))
    for i in range(n_rep):
        ids.append(f"r{i:03d}")
        labels[ids[-1]] = R_LABEL
        rows.append(rng.normal(rep_center, 0.5, dim))
    emb = EmbeddingSet(
        ids=tuple(ids),
        matrix=np.asarray(rows, dtype=np.float32),
        normalized=False,
        provenance=Provenance.TRAINED_D2V,
        dataset_kind=DatasetKind.POLITICAL,
    )
    return LabeledSet(embeddings=emb, labels=labels, dataset_kind=DatasetKind.POLITICAL)


class TestLabeledSet:
    def test_other_party_excluded(self):
        emb = EmbeddingSet(
            ids=("a", "b", "c"),
            matrix=np.eye(3, dtype=np.float32),
            normalized=False,
            provenance=Provenance.TRAINED_D2V,
        )
        parties = {
            "a": DEMOCRATIC,
            "b": REPUBLICAN,
            "c": Party(PartyKind.OTHER, other_label="Ind"),
        }
        data = labeled_set(emb, parties)
        assert data.ids == ("a", "b")
        assert data.labels == {"a": D_LABEL, "b": R_LABEL}

    def test_single_class_rejected(self):
        emb = EmbeddingSet(
            ids=("a", "b"), matrix=np.eye(2, dtype=np.float32),
            normalized=False, provenance=Provenance.TRAINED_D2V,
        )
        with pytest.raises(ValueError):
            LabeledSet(embeddings=emb, labels={"a": D_LABEL, "b": D_LABEL})


class TestStratifiedSplit:
    def test_ten_ten_at_eighty_percent(self):
        data = make_labeled(10, 10)
        train, test = stratified_split(data, SplitConfig(train_fraction=0.8, seed=1))
        assert sum(1 for i in train.ids if i.startswith("d")) == 8
        assert sum(1 for i in train.ids if i.startswith("r")) == 8
        assert len(test) == 4
        assert set(train.ids) | set(test.ids) == set(data.ids)
        assert set(train.ids) & set(test.ids) == set()

    def test_same_seed_identical(self):
        data = make_labeled(11, 9)
        cfg = SplitConfig(seed=7)
        assert stratified_split(data, cfg)[0].ids == stratified_split(data, cfg)[0].ids

    def test_tiny_class_errors(self):
        data = make_labeled(2, 2)
        emb = data.subset(["d000", "d001", "r000"])  # leaves one R... need both classes
        with pytest.raises(SplitError):
            stratified_split(
                LabeledSet(embeddings=emb.embeddings, labels=emb.labels), SplitConfig()
            )

    def test_proportions_within_one_item(self):
        data = make_labeled(13, 7)
        train, test = stratified_split(data, SplitConfig(train_fraction=0.75, seed=3))
        for prefix, total in (("d", 13), ("r", 7)):
            got = sum(1 for i in train.ids if i.startswith(prefix))
            assert abs(got - 0.75 * total) <= 1


class TestKMeans:
    def test_separated_blobs_perfectly_clustered(self):
        rng = np.random.default_rng(0)
        a = rng.normal(+5.0, 0.1, (20, 2))
        b = rng.normal(-5.0, 0.1, (20, 2))
        X = np.vstack([a, b])
        centroids, assignments, inertia = kmeans_fit(X, KMeansConfig(seed=1))
        assert len(set(assignments[:20])) == 1
        assert len(set(assignments[20:])) == 1
        assert assignments[0] != assignments[20]
        assert inertia < 20.0

    def test_identical_points_rejected(self):
        X = np.ones((10, 3))
        with pytest.raises(FitError):
            kmeans_fit(X, KMeansConfig())

    def test_best_of_restarts_no_worse_than_single(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(60, 3))
        multi = kmeans_fit(X, KMeansConfig(seed=5, restarts=10))
        for restart in range(10):
            r = np.random.default_rng((5, restart))
            init = _kmeanspp_init(X, 2, r)
            _, _, inertia, _ = _lloyd(X, init, 100, 1e-6)
            assert multi[2] <= inertia + 1e-9

    def test_lloyd_inertia_non_increasing_per_iteration(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(80, 4))
        init = _kmeanspp_init(X, 2, np.random.default_rng(0))
        _, _, _, history = _lloyd(X, init, 100, 0.0)
        for prev, cur in zip(history, history[1:]):
            assert cur <= prev + 1e-9

    def test_empty_cluster_repaired(self):
        # one far outlier; k-means++ may seed both centroids in the cluster
        X = np.vstack([np.zeros((30, 2)), np.full((1, 2), 50.0),
                       np.random.default_rng(1).normal(0, 0.01, (9, 2))])
        centroids, assignments, _ = kmeans_fit(X, KMeansConfig(seed=2))
        assert set(assignments.tolist()) == {0, 1}


class TestClusterAccuracy:
    def test_perfect_match(self):
        acc = cluster_accuracy([0, 0, 1, 1], [D_LABEL, D_LABEL, R_LABEL, R_LABEL])
        assert acc.accuracy == 1.0

    def test_inverted_labels_also_perfect(self):
        acc = cluster_accuracy([1, 1, 0, 0], [D_LABEL, D_LABEL, R_LABEL, R_LABEL])
        assert acc.accuracy == 1.0
        assert acc.mapping == {0: R_LABEL, 1: D_LABEL}

    def test_never_below_half_exhaustively(self):
        labels = np.array([D_LABEL] * 3 + [R_LABEL] * 3)
        values = []
        for bits in itertools.product([0, 1], repeat=6):
            values.append(cluster_accuracy(np.array(bits), labels).accuracy)
        assert min(values) == 0.5
        assert all(v >= 0.5 for v in values)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            cluster_accuracy([0, 1], [D_LABEL])


class TestSVM:
    def test_separable_two_points(self):
        emb = EmbeddingSet(
            ids=("pos", "neg"),
            matrix=np.array([[1.0], [-1.0]], dtype=np.float32),
            normalized=False,
            provenance=Provenance.TRAINED_D2V,
        )
        data = LabeledSet(embeddings=emb, labels={"pos": D_LABEL, "neg": R_LABEL})
        model = svm_train(data, SVMConfig(lam=1e-2, epochs=50, seed=0))
        report = evaluate(model, data)
        assert report.accuracy == 1.0

    def test_label_flip_flips_weights_exactly(self):
        data = make_labeled(8, 8, seed=2)
        flipped = LabeledSet(
            embeddings=data.embeddings,
            labels={i: -l for i, l in data.labels.items()},
            dataset_kind=data.dataset_kind,
        )
        cfg = SVMConfig(lam=1e-3, epochs=20, seed=4)
        a = svm_train(data, cfg)
        b = svm_train(flipped, cfg)
        assert np.array_equal(a.weights, -b.weights)
        assert a.bias == -b.bias

    def test_objective_decreases_over_training(self):
        data = make_labeled(30, 30, seed=6, dem_center=0.8, rep_center=-0.8)
        model = svm_train(data, SVMConfig(lam=1e-3, epochs=40, seed=1))
        history = model.objective_history
        assert history[-1] < history[1]
        # allow noise but require the trend within a 5% band of the running best
        best = history[1]
        for value in history[2:]:
            assert value <= best * 1.05
            best = min(best, value)

    def test_objective_matches_formula(self):
        data = make_labeled(5, 5, seed=8)
        model = svm_train(data, SVMConfig(lam=1e-2, epochs=3, seed=3))
        X, y = data.matrix(), data.label_array()
        assert model.objective_history[-1] == pytest.approx(
            svm_objective(model.weights, model.bias, X, y, 1e-2), rel=1e-12
        )

    def test_deterministic(self):
        data = make_labeled(9, 9, seed=5)
        cfg = SVMConfig(seed=11, epochs=10)
        assert np.array_equal(svm_train(data, cfg).weights, svm_train(data, cfg).weights)


class TestEvaluate:
    def test_perfect_model(self):
        data = make_labeled(6, 6, seed=3, dem_center=3.0, rep_center=-3.0)
        model = svm_train(data, SVMConfig(lam=1e-3, epochs=60, seed=0))
        report = evaluate(model, data, model_name="svm")
        assert report.accuracy == 1.0
        assert report.confusion == {"tp": 6, "fn": 0, "fp": 0, "tn": 6}

    def test_constant_model_on_balanced_labels(self):
        data = make_labeled(6, 6, seed=3)
        model = svm_train(data, SVMConfig(epochs=1, seed=0))
        model.weights[:] = 0.0
        model.bias = 1.0  # always predicts Democratic
        report = evaluate(model, data)
        assert report.accuracy == 0.5

    def test_confusion_sums_to_test_size(self):
        data = make_labeled(7, 5, seed=4, dem_center=0.3, rep_center=-0.3)
        train, test = stratified_split(data, SplitConfig(seed=2))
        model = svm_train(train, SVMConfig(epochs=10, seed=2))
        report = evaluate(model, test)
        assert sum(report.confusion.values()) == len(test)

    def test_dim_mismatch(self):
        data = make_labeled(4, 4, dim=4)
        other = make_labeled(4, 4, dim=6)
        model = svm_train(data, SVMConfig(epochs=2, seed=0))
        with pytest.raises(ValueError):
            evaluate(model, other)


def test_party_signal_pipeline_reaches_95_percent():
    """Synthetic corpus with party-conditional signal tokens: doc2vec + SVM
    must separate; the label-shuffled control must stay near chance."""
    from polariscope.classify import labeled_set as build_labels
    from polariscope.embed import D2VConfig, train_doc2vec

    rng = np.random.default_rng(12)
    shared = [f"s{i}" for i in range(80)]
    dem_signal = [f"demsig{i}" for i in range(10)]
    rep_signal = [f"repsig{i}" for i in range(10)]
    corpus = []
    parties = {}
    for i in range(120):
        dem = i % 2 == 0
        doc_id = f"p{i:03d}"
        tokens = list(rng.choice(shared, size=40))
        signal = dem_signal if dem else rep_signal
        tokens += list(rng.choice(signal, size=20))
        rng.shuffle(tokens)
        corpus.append((doc_id, tokens))
        parties[doc_id] = DEMOCRATIC if dem else REPUBLICAN

    cfg = D2VConfig(dim=32, window=4, negatives=5, epochs=12, min_count=1,
                    subsample=0, seed=2)
    model = train_doc2vec(corpus, cfg)
    emb = model.doc_embedding_set(normalized=True)
    data = build_labels(emb, parties)
    train, test = stratified_split(data, SplitConfig(seed=5))
    svm = svm_train(train, SVMConfig(lam=1e-3, epochs=80, seed=5))
    report = evaluate(svm, test)
    assert report.accuracy >= 0.95

    # shuffled-label control
    ids = list(data.ids)
    shuffled_labels = [data.labels[i] for i in ids]
    np.random.default_rng(31).shuffle(shuffled_labels)
    control = LabeledSet(
        embeddings=data.embeddings,
        labels=dict(zip(ids, shuffled_labels)),
        dataset_kind=data.dataset_kind,
    )
    train_c, test_c = stratified_split(control, SplitConfig(seed=5))
    svm_c = svm_train(train_c, SVMConfig(lam=1e-3, epochs=80, seed=5))
    control_report = evaluate(svm_c, test_c)
    assert abs(control_report.accuracy - 0.5) <= 0.07
