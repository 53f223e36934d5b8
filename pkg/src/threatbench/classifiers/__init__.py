"""Uniform fit/predict interface over the nine from-scratch algorithms.

Every algorithm is constructible with zero explicit hyperparameters; the
defaults below mirror common upstream implementations.  Fits are fully
deterministic in (spec, seed, table), including under parallel ensemble
training (per-member seeds are derived up front).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import SchemaMismatch, UnsupportedModel
from . import boost, forest, simple
from .trees import Tree, TreeNode, as_nodes, gini, grow_tree, grow_tree_weighted

__all__ = [
    "ALGORITHMS", "ClassifierSpec", "TrainedModel", "Tree", "TreeNode",
    "as_nodes", "fit", "predict", "feature_importance", "gini",
    "grow_tree", "grow_tree_weighted", "tree_ensemble",
]

DEFAULTS = {
    "cart": {"max_depth": 30, "min_split": 2},
    "random_forest": {"n_trees": 100, "mtry": None, "max_depth": 30,
                      "min_split": 2},
    "extra_trees": {"n_trees": 100, "mtry": None, "max_depth": 30,
                    "min_split": 2},
    "bagged_cart": {"n_trees": 25, "max_depth": 30, "min_split": 2},
    "adaboost": {"n_rounds": 50, "max_depth": 3, "min_split": 2},
    "knn": {"k": 5, "standardize": True},
    "gaussian_nb": {"var_floor": 1e-9},
    "multinom_logreg": {"epochs": 500, "lr": 0.1, "l2": 1e-4},
    "shallow_mlp": {"hidden": 16, "epochs": 200, "lr": 0.3, "momentum": 0.9,
                    "standardize": False},
}

FAMILY = {
    "cart": "tree",
    "random_forest": "forest",
    "extra_trees": "forest",
    "bagged_cart": "bagging",
    "adaboost": "boosting",
    "knn": "nearest_neighbors",
    "gaussian_nb": "bayes",
    "multinom_logreg": "linear",
    "shallow_mlp": "neural_net",
}

MODEL_LABEL = {
    "cart": "CART decision tree",
    "random_forest": "Random forest",
    "extra_trees": "Extremely randomized trees",
    "bagged_cart": "Bagged CART",
    "adaboost": "Boosted trees (SAMME)",
    "knn": "k-nearest neighbors",
    "gaussian_nb": "Gaussian naive Bayes",
    "multinom_logreg": "Multinomial logistic regression",
    "shallow_mlp": "Single-hidden-layer perceptron",
}

ALGORITHMS = tuple(DEFAULTS)

VOTING_TREE_ALGORITHMS = ("cart", "random_forest", "extra_trees", "bagged_cart")
TREE_ALGORITHMS = VOTING_TREE_ALGORITHMS + ("adaboost",)


@dataclass
class ClassifierSpec:
    """Algorithm id, seed and hyperparameter overrides."""

    algorithm: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in DEFAULTS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; "
                             f"choose from {sorted(DEFAULTS)}")
        unknown = set(self.params) - set(DEFAULTS[self.algorithm])
        if unknown:
            raise ValueError(f"{self.algorithm}: unknown hyperparameters "
                             f"{sorted(unknown)}")

    @property
    def family(self):
        return FAMILY[self.algorithm]

    def resolved(self):
        return {**DEFAULTS[self.algorithm], **self.params}


@dataclass
class TrainedModel:
    """Immutable fitted classifier with a uniform predict interface."""

    algorithm: str
    columns: tuple
    classes: np.ndarray  # original class codes present in training, sorted
    state: object
    params: dict
    seed: int
    degenerate: bool = False
    converged: bool = True
    fit_seconds: float = 0.0

    @property
    def n_classes(self):
        return len(self.classes)


_FITTERS = {
    "cart": forest.fit_cart,
    "random_forest": forest.fit_random_forest,
    "extra_trees": forest.fit_extra_trees,
    "bagged_cart": forest.fit_bagged_cart,
    "adaboost": boost.fit_adaboost,
    "knn": simple.fit_knn,
    "gaussian_nb": simple.fit_gaussian_nb,
    "multinom_logreg": simple.fit_multinom_logreg,
    "shallow_mlp": simple.fit_shallow_mlp,
}


def _table_xy(table):
    """Accepts a DatasetTable or a bare (X, y) pair."""
    if isinstance(table, tuple):
        X, y = table
        columns = tuple(f"f{i}" for i in range(X.shape[1]))
    else:
        X, y = table.X, table.y
        columns = tuple(table.columns)
    if y is None:
        raise ValueError("training table has no labels")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise ValueError("training table is empty")
    return X, y, columns


def fit(spec, table, jobs=1):
    """Train ``spec`` on a labeled table; wall time is recorded on the model."""
    X, y, columns = _table_xy(table)
    params = spec.resolved()
    classes = np.unique(y)

    start = time.perf_counter()
    if len(classes) == 1:
        return TrainedModel(spec.algorithm, columns, classes, None, params,
                            spec.seed, degenerate=True,
                            fit_seconds=time.perf_counter() - start)

    y_enc = np.searchsorted(classes, y)
    converged = True
    result = _FITTERS[spec.algorithm](X, y_enc, len(classes), params,
                                      spec.seed, jobs=jobs)
    if spec.algorithm in ("multinom_logreg", "shallow_mlp"):
        state, converged = result
    else:
        state = result
    return TrainedModel(spec.algorithm, columns, classes, state, params,
                        spec.seed, converged=converged,
                        fit_seconds=time.perf_counter() - start)


def _rows_x(model, rows):
    if isinstance(rows, np.ndarray):
        X = rows
    else:
        if tuple(rows.columns) != tuple(model.columns):
            raise SchemaMismatch(
                f"prediction columns {rows.columns} != training columns "
                f"{model.columns}")
        X = rows.X
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[1] != len(model.columns):
        raise SchemaMismatch(
            f"expected {len(model.columns)} features, got {X.shape[1]}")
    return X


def predict(model, rows):
    """Labels (original codes) and per-class score rows summing to one."""
    X = _rows_x(model, rows)
    n = X.shape[0]
    if model.degenerate:
        return (np.full(n, model.classes[0], dtype=np.int64),
                np.ones((n, 1)))

    k = model.n_classes
    algo = model.algorithm
    if algo == "cart":
        enc, scores = forest.predict_single_tree(model.state[0], X)
    elif algo in ("random_forest", "extra_trees", "bagged_cart"):
        enc, scores = forest.predict_votes(model.state, X, k)
    elif algo == "adaboost":
        enc, scores = boost.predict_adaboost(model.state, X, k)
    elif algo == "knn":
        enc, scores = simple.predict_knn(model.state, X, k)
    elif algo == "gaussian_nb":
        enc, scores = simple.predict_gaussian_nb(model.state, X, k)
    elif algo == "multinom_logreg":
        enc, scores = simple.predict_multinom_logreg(model.state, X, k)
    elif algo == "shallow_mlp":
        enc, scores = simple.predict_shallow_mlp(model.state, X, k)
    else:  # pragma: no cover
        raise UnsupportedModel(algo)
    return model.classes[enc], scores


def tree_ensemble(model):
    """The list of Trees behind a tree-family model."""
    if model.degenerate or model.algorithm not in TREE_ALGORITHMS:
        raise UnsupportedModel(
            f"{model.algorithm} has no decision-tree structure")
    if model.algorithm == "adaboost":
        return model.state[0]
    return model.state


def feature_importance(model):
    """Mean decrease in Gini impurity per feature, normalized to sum 1."""
    trees = tree_ensemble(model)
    return forest.ensemble_importance(trees, len(model.columns))
