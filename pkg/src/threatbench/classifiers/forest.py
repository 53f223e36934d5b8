"""CART and the bootstrap/randomized tree ensembles."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .trees import Tree, grow_tree


def _tree_seeds(seed, n_trees):
    """Stable per-member seeds so serial and parallel fits agree."""
    return np.random.SeedSequence(seed).generate_state(n_trees, np.uint64)


def resolve_mtry(params, n_features):
    mtry = params.get("mtry")
    if mtry is None:
        return max(1, int(np.floor(np.sqrt(n_features))))
    return int(mtry)


def fit_cart(X, y, n_classes, params, seed, jobs=1):
    tree = grow_tree(X, y, n_classes, params["max_depth"], params["min_split"],
                     X.shape[1], random_thresh=False, bootstrap=False, seed=0)
    return [tree]


def _fit_ensemble(X, y, n_classes, params, seed, mtry, random_thresh,
                  bootstrap, jobs):
    seeds = _tree_seeds(seed, params["n_trees"])

    def build(s):
        return grow_tree(X, y, n_classes, params["max_depth"],
                         params["min_split"], mtry, random_thresh, bootstrap, s)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(build, seeds))
    return [build(s) for s in seeds]


def fit_random_forest(X, y, n_classes, params, seed, jobs=1):
    mtry = resolve_mtry(params, X.shape[1])
    return _fit_ensemble(X, y, n_classes, params, seed, mtry,
                         random_thresh=False, bootstrap=True, jobs=jobs)


def fit_extra_trees(X, y, n_classes, params, seed, jobs=1):
    mtry = resolve_mtry(params, X.shape[1])
    return _fit_ensemble(X, y, n_classes, params, seed, mtry,
                         random_thresh=True, bootstrap=False, jobs=jobs)


def fit_bagged_cart(X, y, n_classes, params, seed, jobs=1):
    return _fit_ensemble(X, y, n_classes, params, seed, X.shape[1],
                         random_thresh=False, bootstrap=True, jobs=jobs)


def predict_votes(trees, X, n_classes):
    """Majority vote over per-tree labels; scores are vote fractions."""
    n = X.shape[0]
    votes = np.zeros((n, n_classes), dtype=np.float64)
    rows = np.arange(n)
    for tree in trees:
        votes[rows, tree.predict_labels(X)] += 1.0
    scores = votes / len(trees)
    return np.argmax(votes, axis=1), scores


def predict_single_tree(tree, X):
    """Leaf distribution as scores; argmax label (lowest index on ties)."""
    counts = tree.counts[tree.apply(X)]
    scores = counts / counts.sum(axis=1, keepdims=True)
    return np.argmax(counts, axis=1), scores


def ensemble_importance(trees, n_features):
    """Mean decrease in impurity, normalized to sum to one."""
    imp = np.zeros(n_features)
    for tree in trees:
        imp += tree.importance(n_features)
    total = imp.sum()
    if total > 0:
        imp /= total
    return imp
