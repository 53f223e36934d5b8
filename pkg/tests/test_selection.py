import numpy as np
import pytest

from threatbench.classifiers import ClassifierSpec
from threatbench.features import DatasetTable
from threatbench.selection import (
    BorutaConfig,
    boruta,
    importance_ranking,
    shadow_extend,
    write_report,
)


def oracle_table(rng, n=500, n_noise=5, k=3):
    """Label-copy feature + shuffled-copy noise: relevance known upfront."""
    y = rng.integers(0, k, size=n)
    cols_data = [y.astype(float)]
    for _ in range(n_noise):
        cols_data.append(y[rng.permutation(n)].astype(float))
    X = np.column_stack(cols_data)
    users = np.array([f"u{i}" for i in range(n)], dtype=object)
    cols = ("label_copy",) + tuple(f"noise{i}" for i in range(n_noise))
    return DatasetTable(users, np.zeros(n, dtype=int), X, y, cols)


def light_config(seed, iterations=100, importance="permutation"):
    # permutation importance keeps null features centered at zero, which
    # the reject side of the binomial test needs; see decisions notes
    return BorutaConfig(iterations=iterations, alpha=0.01, seed=seed,
                        importance=importance,
                        forest=ClassifierSpec("random_forest",
                                              params={"n_trees": 30,
                                                      "max_depth": 8}))


class TestShadowExtend:
    def test_doubles_columns(self):
        rng = np.random.default_rng(0)
        t = oracle_table(rng)
        ext = shadow_extend(t, seed=1)
        assert ext.X.shape[1] == 2 * t.X.shape[1]
        assert ext.columns[6] == "shadow_label_copy"

    def test_shadow_is_permutation(self):
        rng = np.random.default_rng(1)
        t = oracle_table(rng)
        ext = shadow_extend(t, seed=2)
        d = t.X.shape[1]
        for j in range(d):
            assert sorted(ext.X[:, d + j]) == sorted(t.X[:, j])

    def test_constant_feature_constant_shadow(self):
        rng = np.random.default_rng(2)
        t = oracle_table(rng)
        t.X[:, 3] = 7.0
        ext = shadow_extend(t, seed=3)
        assert np.all(ext.X[:, t.X.shape[1] + 3] == 7.0)

    def test_labels_untouched(self):
        rng = np.random.default_rng(3)
        t = oracle_table(rng)
        ext = shadow_extend(t, seed=4)
        assert np.array_equal(ext.y, t.y)


class TestBorutaOracle:
    def test_copy_confirmed_noise_rejected(self):
        rng = np.random.default_rng(4)
        t = oracle_table(rng)
        verdict = boruta(t, light_config(seed=0))
        assert verdict.status["label_copy"] == "Confirmed"
        for j in range(5):
            assert verdict.status[f"noise{j}"] == "Rejected", j

    def test_monotonicity_hits_near_iterations(self):
        rng = np.random.default_rng(5)
        t = oracle_table(rng)
        verdict = boruta(t, light_config(seed=1, importance="gini"))
        assert verdict.hits[0] >= 0.95 * verdict.iterations
        assert verdict.status["label_copy"] == "Confirmed"

    def test_all_noise_confirms_nothing(self):
        rng = np.random.default_rng(6)
        t = oracle_table(rng)
        X = t.X.copy()
        X[:, 0] = t.y[rng.permutation(len(t))].astype(float)  # break the copy
        cols = tuple(f"noise{i}" for i in range(6))
        t = DatasetTable(t.users, t.months, X, t.y, cols)
        verdict = boruta(t, light_config(seed=2))
        assert verdict.confirmed() == []

    def test_statuses_partition_features(self):
        rng = np.random.default_rng(7)
        t = oracle_table(rng)
        verdict = boruta(t, light_config(seed=3, iterations=20))
        total = (len(verdict.confirmed()) + len(verdict.rejected())
                 + len(verdict.tentative()))
        assert total == len(verdict.columns)

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        t = oracle_table(rng, n=200)
        a = boruta(t, light_config(seed=5, iterations=20))
        b = boruta(t, light_config(seed=5, iterations=20))
        assert np.array_equal(a.hits, b.hits)
        assert a.ranking == b.ranking
        assert np.array_equal(a.median_importance, b.median_importance)

    def test_gini_importance_flag(self):
        rng = np.random.default_rng(9)
        t = oracle_table(rng)
        verdict = boruta(t, light_config(seed=6, iterations=30,
                                         importance="gini"))
        assert verdict.status["label_copy"] == "Confirmed"


class TestRanking:
    def test_order_and_ties(self):
        rng = np.random.default_rng(10)
        t = oracle_table(rng, n=200)
        verdict = boruta(t, light_config(seed=6, iterations=20))
        verdict.median_importance = np.array([0.3, 0.1, 0.6, 0.0, 0.0, 0.0])
        verdict.ranking = sorted(range(6),
                                 key=lambda j: (-verdict.median_importance[j],
                                                j))
        rows = importance_ranking(verdict)
        assert [r["feature"] for r in rows[:3]] == \
            ["noise1", "label_copy", "noise0"]
        assert [r["rank"] for r in rows] == [1, 2, 3, 4, 5, 6]
        # ties broken by feature index
        assert [r["feature"] for r in rows[3:]] == \
            ["noise2", "noise3", "noise4"]

    def test_report_rows_match_feature_count(self, tmp_path):
        rng = np.random.default_rng(11)
        t = oracle_table(rng, n=150)
        verdict = boruta(t, light_config(seed=7, iterations=20))
        path = tmp_path / "report.csv"
        write_report(path, verdict)
        lines = path.read_text().splitlines()
        assert lines[0] == ("feature,status,hits,iterations,"
                            "median_importance,rank")
        assert len(lines) == 1 + len(verdict.columns)
