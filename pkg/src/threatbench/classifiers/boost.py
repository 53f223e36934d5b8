"""Multiclass adaptive boosting (SAMME) over shallow weighted trees."""

from __future__ import annotations

import numpy as np

from .trees import grow_tree_weighted


def fit_adaboost(X, y, n_classes, params, seed, jobs=1):
    """Returns (trees, alphas); stops early on perfect or useless rounds."""
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    trees = []
    alphas = []
    for _ in range(params["n_rounds"]):
        tree = grow_tree_weighted(X, y, w, n_classes,
                                  params["max_depth"], params["min_split"])
        pred = tree.predict_labels(X)
        incorrect = pred != y
        err = float(w[incorrect].sum())
        if err <= 0.0:
            # perfect learner: keep it with a large say and stop
            trees.append(tree)
            alphas.append(10.0 + np.log(max(n_classes - 1, 1)))
            break
        if err >= 1.0 - 1.0 / n_classes:
            if not trees:
                trees.append(tree)
                alphas.append(1.0)
            break
        alpha = np.log((1.0 - err) / err) + np.log(n_classes - 1.0)
        trees.append(tree)
        alphas.append(alpha)
        w = w * np.exp(alpha * incorrect)
        w /= w.sum()
    return trees, np.asarray(alphas)


def predict_adaboost(state, X, n_classes):
    trees, alphas = state
    n = X.shape[0]
    votes = np.zeros((n, n_classes))
    rows = np.arange(n)
    for tree, alpha in zip(trees, alphas):
        votes[rows, tree.predict_labels(X)] += alpha
    scores = votes / votes.sum(axis=1, keepdims=True)
    return np.argmax(votes, axis=1), scores
