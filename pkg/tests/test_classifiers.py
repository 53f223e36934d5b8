import numpy as np
import pytest

from conftest import random_table
from threatbench.classifiers import (
    ALGORITHMS,
    ClassifierSpec,
    feature_importance,
    fit,
    gini,
    predict,
    tree_ensemble,
)
from threatbench.errors import EmptyNode, SchemaMismatch, UnsupportedModel
from threatbench.features import DatasetTable


def make_table(X, y, cols=None):
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    users = np.array([f"u{i}" for i in range(n)], dtype=object)
    return DatasetTable(users, np.zeros(n, dtype=int), X,
                        np.asarray(y), cols or tuple(f"f{i}" for i in range(d)))


def blobs(rng, n_per_class=60, k=3, d=5, spread=1.0):
    """Well-separated Gaussian blobs, one per class."""
    centers = rng.normal(0, 8, size=(k, d))
    X = np.vstack([centers[c] + rng.normal(0, spread, size=(n_per_class, d))
                   for c in range(k)])
    y = np.repeat(np.arange(k), n_per_class)
    perm = rng.permutation(len(y))
    return make_table(X[perm], y[perm])


class TestGini:
    def test_pure(self):
        assert gini([10, 0, 0, 0, 0]) == 0.0

    def test_even_two(self):
        assert gini([5, 5]) == pytest.approx(0.5, abs=1e-12)

    def test_five_even(self):
        assert gini([1, 1, 1, 1, 1]) == pytest.approx(0.8, abs=1e-12)

    def test_empty_node(self):
        with pytest.raises(EmptyNode):
            gini([0, 0])
        with pytest.raises(EmptyNode):
            gini([])


class TestFitBasics:
    def test_cart_depth_one_separable(self):
        t = make_table([[0.0], [1.0], [10.0], [11.0]], [0, 0, 1, 1])
        model = fit(ClassifierSpec("cart"), t)
        labels, scores = predict(model, t)
        assert np.array_equal(labels, t.y)
        tree = tree_ensemble(model)[0]
        assert tree.n_nodes == 3  # one split, two leaves
        assert np.all(scores.sum(axis=1) == pytest.approx(1.0))

    def test_single_class_flagged_degenerate(self):
        t = make_table([[0.0], [1.0]], [2, 2])
        model = fit(ClassifierSpec("cart"), t)
        assert model.degenerate
        labels, scores = predict(model, t)
        assert np.all(labels == 2)
        assert np.all(scores == 1.0)

    @pytest.mark.parametrize("algo", ALGORITHMS)
    def test_every_algorithm_learns_blobs(self, algo):
        rng = np.random.default_rng(0)
        t = blobs(rng)
        spec = ClassifierSpec(algo, seed=1)
        if algo == "shallow_mlp":
            spec.params["standardize"] = True
        model = fit(spec, t)
        labels, scores = predict(model, t)
        assert np.mean(labels == t.y) > 0.9, algo
        assert scores.shape == (len(t), 3)
        assert np.allclose(scores.sum(axis=1), 1.0, atol=1e-9)

    @pytest.mark.parametrize("algo", ALGORITHMS)
    def test_determinism(self, algo):
        rng = np.random.default_rng(1)
        t = blobs(rng, n_per_class=40, spread=4.0)
        probe = blobs(np.random.default_rng(2), n_per_class=10, spread=4.0)
        a = predict(fit(ClassifierSpec(algo, seed=9), t), probe)
        b = predict(fit(ClassifierSpec(algo, seed=9), t), probe)
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])

    def test_parallel_fit_matches_serial(self):
        rng = np.random.default_rng(2)
        t = blobs(rng, n_per_class=50, spread=3.0)
        serial = fit(ClassifierSpec("random_forest", seed=3), t, jobs=1)
        threaded = fit(ClassifierSpec("random_forest", seed=3), t, jobs=4)
        la, _ = predict(serial, t)
        lb, _ = predict(threaded, t)
        assert np.array_equal(la, lb)

    def test_schema_mismatch(self):
        t = make_table([[0.0, 1.0]] * 4, [0, 0, 1, 1])
        model = fit(ClassifierSpec("cart"), t)
        other = make_table([[0.0]] * 2, [0, 1])
        with pytest.raises(SchemaMismatch):
            predict(model, other)

    def test_nonstandard_labels_preserved(self):
        t = make_table([[0.0], [1.0], [10.0], [11.0]], [3, 3, 7, 7])
        model = fit(ClassifierSpec("knn", params={"k": 1}), t)
        labels, scores = predict(model, t)
        assert set(labels.tolist()) == {3, 7}
        assert scores.shape[1] == 2


class TestPredictSemantics:
    def test_knn_k1_nearest_self(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(30, 4))
        y = rng.integers(0, 3, size=30)
        t = make_table(X, y)
        model = fit(ClassifierSpec("knn", params={"k": 1}), t)
        labels, _ = predict(model, t)
        assert np.array_equal(labels, t.y)

    def test_gaussian_nb_posterior_dominance(self):
        # two 1-feature classes at -5 and +5; probes at the means
        rng = np.random.default_rng(4)
        X = np.concatenate([rng.normal(-5, 1, 100),
                            rng.normal(5, 1, 100)]).reshape(-1, 1)
        y = np.repeat([0, 1], 100)
        model = fit(ClassifierSpec("gaussian_nb"), make_table(X, y))
        labels, scores = predict(model, np.array([[-5.0], [5.0]]))
        assert labels.tolist() == [0, 1]
        assert scores[0, 0] > 0.99 and scores[1, 1] > 0.99

    def test_forest_scores_sum_to_one_five_classes(self):
        rng = np.random.default_rng(5)
        t = blobs(rng, n_per_class=30, k=5)
        model = fit(ClassifierSpec("random_forest", seed=0), t)
        _, scores = predict(model, t)
        assert scores.shape[1] == 5
        assert np.allclose(scores.sum(axis=1), 1.0, atol=1e-12)

    def test_knn_affine_rescale_invariance(self):
        rng = np.random.default_rng(6)
        t = blobs(rng, n_per_class=40, k=3, spread=3.0)
        probe = blobs(np.random.default_rng(7), n_per_class=15, k=3,
                      spread=3.0)
        base, _ = predict(fit(ClassifierSpec("knn"), t), probe)
        scale = rng.uniform(0.5, 50.0, size=t.X.shape[1])
        shift = rng.uniform(-10, 10, size=t.X.shape[1])
        t2 = make_table(t.X * scale + shift, t.y)
        probe2 = make_table(probe.X * scale + shift, probe.y)
        rescaled, _ = predict(fit(ClassifierSpec("knn"), t2), probe2)
        assert np.array_equal(base, rescaled)

    def test_mlp_standardization_helps_on_raw_counts(self):
        # counts near 1000 with small class shifts: every sigmoid saturates
        # on the same side, so the unscaled net cannot learn the boundary
        rng = np.random.default_rng(8)
        n = 240
        y = np.repeat(np.arange(3), n // 3)
        X = np.column_stack([
            rng.normal(1000 + 60 * (y == 0), 25),
            rng.normal(1000 + 60 * (y == 1), 25),
            rng.normal(1000 + 60 * (y == 2), 25),
            rng.normal(500, 25, size=n),
        ])
        perm = rng.permutation(n)
        t = make_table(X[perm], y[perm])
        raw = fit(ClassifierSpec("shallow_mlp", seed=0), t)
        std = fit(ClassifierSpec("shallow_mlp", seed=0,
                                 params={"standardize": True}), t)
        acc_raw = np.mean(predict(raw, t)[0] == t.y)
        acc_std = np.mean(predict(std, t)[0] == t.y)
        assert acc_std >= acc_raw + 0.10

    def test_forest_beats_cart_on_synthetic_features(self, small_table):
        from threatbench.sampling import oversample

        wins = 0
        rng = np.random.default_rng(9)
        for seed in range(10):
            idx = rng.permutation(len(small_table))
            cut = int(0.7 * len(idx))
            train = oversample(small_table.subset(idx[:cut]), seed)
            test = small_table.subset(idx[cut:])
            rf = fit(ClassifierSpec("random_forest", seed=seed), train)
            ct = fit(ClassifierSpec("cart", seed=seed), train)
            acc_rf = np.mean(predict(rf, test)[0] == test.y)
            acc_ct = np.mean(predict(ct, test)[0] == test.y)
            wins += acc_rf >= acc_ct
        assert wins >= 9


class TestFeatureImportance:
    def test_single_split_concentrates(self):
        X = np.zeros((40, 5))
        X[:20, 3] = 1.0
        y = np.repeat([0, 1], 20)
        model = fit(ClassifierSpec("cart"), make_table(X, y))
        imp = feature_importance(model)
        assert imp[3] == pytest.approx(1.0, abs=1e-9)

    def test_unused_feature_zero(self):
        rng = np.random.default_rng(10)
        X = np.column_stack([np.repeat([0.0, 1.0], 30),
                             np.zeros(60)])  # constant second feature
        y = np.repeat([0, 1], 30)
        model = fit(ClassifierSpec("random_forest", seed=0,
                                   params={"n_trees": 20, "mtry": 2}),
                    make_table(X, y))
        imp = feature_importance(model)
        assert imp[1] == 0.0

    def test_sums_to_one(self):
        rng = np.random.default_rng(11)
        t = blobs(rng, n_per_class=40, spread=4.0)
        for algo in ("cart", "random_forest", "extra_trees", "bagged_cart",
                     "adaboost"):
            model = fit(ClassifierSpec(algo, seed=1), t)
            assert feature_importance(model).sum() == \
                pytest.approx(1.0, abs=1e-9), algo

    def test_non_tree_unsupported(self):
        rng = np.random.default_rng(12)
        t = blobs(rng, n_per_class=20)
        model = fit(ClassifierSpec("knn"), t)
        with pytest.raises(UnsupportedModel):
            feature_importance(model)


class TestSpecValidation:
    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            ClassifierSpec("svm")

    def test_unknown_hyperparameter(self):
        with pytest.raises(ValueError):
            ClassifierSpec("cart", params={"trees": 10})

    def test_zero_config_constructible(self):
        for algo in ALGORITHMS:
            spec = ClassifierSpec(algo)
            assert spec.resolved()
