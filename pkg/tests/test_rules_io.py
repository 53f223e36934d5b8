import csv

import numpy as np
import pytest

from conftest import random_table
from test_classifiers import blobs, make_table
from threatbench.classifiers import (
    ALGORITHMS,
    ClassifierSpec,
    fit,
    predict,
    tree_ensemble,
)
from threatbench.classifiers.model_io import dump_model, load_model
from threatbench.classifiers.rules import (
    classify_with_rules,
    extract_rules,
    write_rules_csv,
    write_rules_text,
)
from threatbench.errors import UnsupportedModel


class TestRuleExtraction:
    def test_depth_one_tree_two_rules(self):
        t = make_table([[0.0], [1.0], [10.0], [11.0]], [0, 0, 1, 1])
        model = fit(ClassifierSpec("cart"), t)
        rules = extract_rules(model)
        assert len(rules) == 2
        assert all(len(r.conditions) == 1 for r in rules)
        assert {r.label for r in rules} == {0, 1}
        assert all(r.confidence == 1.0 for r in rules)

    def test_rule_count_equals_leaf_count(self):
        rng = np.random.default_rng(0)
        t = blobs(rng, n_per_class=50, spread=5.0)
        model = fit(ClassifierSpec("random_forest", seed=1,
                                   params={"n_trees": 10}), t)
        rules = extract_rules(model)
        assert len(rules) == sum(tr.n_leaves for tr in tree_ensemble(model))

    def test_support_counts_are_leaf_row_counts(self):
        t = make_table([[0.0], [1.0], [10.0], [11.0], [12.0]],
                       [0, 0, 1, 1, 1])
        model = fit(ClassifierSpec("cart"), t)
        rules = extract_rules(model)
        assert sorted(r.support for r in rules) == [2.0, 3.0]

    def test_unsupported_for_non_tree(self):
        rng = np.random.default_rng(1)
        t = blobs(rng, n_per_class=20)
        for algo in ("knn", "gaussian_nb", "multinom_logreg", "adaboost"):
            model = fit(ClassifierSpec(algo, seed=0), t)
            with pytest.raises(UnsupportedModel):
                extract_rules(model)

    @pytest.mark.parametrize("algo", ["cart", "random_forest", "extra_trees",
                                      "bagged_cart"])
    def test_rule_reclassification_reproduces_predict(self, algo):
        rng = np.random.default_rng(2)
        t = blobs(rng, n_per_class=40, k=4, spread=6.0)
        probe = blobs(np.random.default_rng(3), n_per_class=25, k=4,
                      spread=6.0)
        model = fit(ClassifierSpec(algo, seed=5,
                                   params={} if algo == "cart"
                                   else {"n_trees": 15}), t)
        rules = extract_rules(model)
        direct, _ = predict(model, probe)
        via_rules = classify_with_rules(rules, probe.X, model.classes)
        assert np.array_equal(direct, via_rules)

    def test_csv_and_text_exports(self, tmp_path):
        t = make_table([[0.0], [1.0], [10.0], [11.0]], [0, 1, 1, 1])
        model = fit(ClassifierSpec("cart"), t)
        rules = extract_rules(model)
        csv_path = tmp_path / "rules.csv"
        txt_path = tmp_path / "rules.txt"
        write_rules_csv(csv_path, rules, columns=model.columns,
                        class_names={0: "Benign", 1: "Thief"})
        write_rules_text(txt_path, rules, columns=model.columns,
                         class_names={0: "Benign", 1: "Thief"})
        with open(csv_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == len(rules)
        assert rows[0]["rule_id"] == "0"
        assert set(rows[0]) == {"rule_id", "conditions", "label", "support",
                                "confidence"}
        text = txt_path.read_text()
        assert text.startswith("IF ")
        assert " THEN " in text
        assert "f0" in text


class TestModelIo:
    @pytest.mark.parametrize("algo", ALGORITHMS)
    def test_round_trip_predictions_exact(self, algo, tmp_path):
        rng = np.random.default_rng(4)
        t = blobs(rng, n_per_class=30, k=3, spread=4.0)
        probe = blobs(np.random.default_rng(5), n_per_class=20, k=3,
                      spread=4.0)
        params = {"n_trees": 8} if algo in ("random_forest", "extra_trees",
                                            "bagged_cart") else {}
        model = fit(ClassifierSpec(algo, seed=2, params=params), t)
        path = tmp_path / f"{algo}.txt"
        dump_model(model, path)
        again = load_model(path)
        assert again.algorithm == model.algorithm
        assert tuple(again.columns) == tuple(model.columns)
        la, sa = predict(model, probe)
        lb, sb = predict(again, probe)
        assert np.array_equal(la, lb)
        assert np.array_equal(sa, sb)

    def test_degenerate_round_trip(self, tmp_path):
        t = make_table([[0.0], [1.0]], [4, 4])
        model = fit(ClassifierSpec("random_forest"), t)
        path = tmp_path / "deg.txt"
        dump_model(model, path)
        again = load_model(path)
        assert again.degenerate
        labels, _ = predict(again, np.array([[5.0]]))
        assert labels.tolist() == [4]

    def test_flags_preserved(self, tmp_path):
        rng = np.random.default_rng(6)
        t = blobs(rng, n_per_class=20)
        model = fit(ClassifierSpec("multinom_logreg",
                                   params={"epochs": 3}), t)
        path = tmp_path / "m.txt"
        dump_model(model, path)
        again = load_model(path)
        assert again.converged == model.converged
        assert again.params == model.params
