"""All-relevant feature selection with shadow features.

Each iteration appends a shuffled copy of every real feature, fits a forest
on the widened table, and scores a hit for each real feature whose
importance beats the best shadow.  After the configured number of
iterations a two-sided binomial test against p=0.5 sorts features into
Confirmed / Rejected / Tentative; the ranking orders features by median
importance across iterations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .classifiers import ClassifierSpec, feature_importance, fit, predict
from .errors import EmptyClassSet
from .features import DatasetTable


@dataclass
class BorutaConfig:
    iterations: int = 100
    alpha: float = 0.01
    forest: ClassifierSpec = field(default_factory=lambda: ClassifierSpec(
        "random_forest", params={"n_trees": 40, "max_depth": 12}))
    importance: str = "gini"  # or "permutation"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.iterations < 10:
            raise ValueError("need at least 10 iterations")
        if self.importance not in ("gini", "permutation"):
            raise ValueError("importance must be 'gini' or 'permutation'")


@dataclass
class BorutaVerdict:
    columns: tuple
    status: dict           # column -> "Confirmed" | "Rejected" | "Tentative"
    hits: np.ndarray
    iterations: int
    median_importance: np.ndarray
    ranking: list          # column indices, best first

    def confirmed(self):
        return [c for c in self.columns if self.status[c] == "Confirmed"]

    def rejected(self):
        return [c for c in self.columns if self.status[c] == "Rejected"]

    def tentative(self):
        return [c for c in self.columns if self.status[c] == "Tentative"]


def shadow_extend(table, seed):
    """Append one row-permuted shadow column per real feature."""
    if table.X.shape[1] < 1:
        raise ValueError("table has no feature columns")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    n = len(table)
    shadows = np.empty_like(table.X)
    for j in range(table.X.shape[1]):
        shadows[:, j] = table.X[rng.permutation(n), j]
    X = np.hstack([table.X, shadows])
    columns = tuple(table.columns) + tuple(
        f"shadow_{c}" for c in table.columns)
    return DatasetTable(table.users, table.months, X, table.y, columns)


def _permutation_importance(model, table, seed):
    """Accuracy drop per feature when that column is shuffled."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    base_labels, _ = predict(model, table)
    base_acc = float(np.mean(base_labels == table.y))
    imp = np.empty(table.X.shape[1])
    for j in range(table.X.shape[1]):
        Xp = table.X.copy()
        Xp[:, j] = Xp[rng.permutation(len(table)), j]
        labels, _ = predict(model, Xp)
        imp[j] = base_acc - float(np.mean(labels == table.y))
    return imp


def boruta(table, config):
    """Run the shadow-feature relevance test; deterministic in config.seed."""
    if table.y is None or len(table) == 0:
        raise EmptyClassSet("boruta needs a labeled, non-empty table")
    counts = np.bincount(table.y)
    if np.any(counts[np.unique(table.y)] < 2):
        raise EmptyClassSet("every present class needs at least 2 rows")

    d = table.X.shape[1]
    ss = np.random.SeedSequence(config.seed)
    iteration_seeds = ss.generate_state(3 * config.iterations, np.uint32)

    hits = np.zeros(d, dtype=np.int64)
    history = np.empty((config.iterations, d))
    for it in range(config.iterations):
        extended = shadow_extend(table, int(iteration_seeds[3 * it]))
        # shuffle column order so the deterministic lowest-index tie-break
        # in the tree kernels cannot systematically favor real features
        perm_rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(int(iteration_seeds[3 * it + 1]))))
        perm = perm_rng.permutation(2 * d)
        shuffled = DatasetTable(
            extended.users, extended.months, extended.X[:, perm],
            extended.y, tuple(extended.columns[j] for j in perm))
        spec = ClassifierSpec(config.forest.algorithm,
                              seed=int(iteration_seeds[3 * it + 2]),
                              params=dict(config.forest.params))
        model = fit(spec, shuffled)
        if config.importance == "gini":
            imp_shuffled = feature_importance(model)
        else:
            imp_shuffled = _permutation_importance(
                model, shuffled, int(iteration_seeds[3 * it + 2]))
        imp = np.empty(2 * d)
        imp[perm] = imp_shuffled
        real = imp[:d]
        shadow_max = imp[d:].max()
        hits[real > shadow_max] += 1
        history[it] = real

    status = {}
    for j, column in enumerate(table.columns):
        p = binomtest(int(hits[j]), config.iterations, 0.5,
                      alternative="two-sided").pvalue
        if p <= config.alpha:
            status[column] = ("Confirmed" if hits[j] > config.iterations / 2
                              else "Rejected")
        else:
            status[column] = "Tentative"

    median_imp = np.median(history, axis=0)
    ranking = sorted(range(d), key=lambda j: (-median_imp[j], j))
    return BorutaVerdict(tuple(table.columns), status, hits,
                         config.iterations, median_imp, ranking)


def importance_ranking(verdict):
    """Report rows (rank, column, status, hits, median importance)."""
    rows = []
    for rank, j in enumerate(verdict.ranking, 1):
        column = verdict.columns[j]
        rows.append({
            "feature": column,
            "status": verdict.status[column],
            "hits": int(verdict.hits[j]),
            "iterations": verdict.iterations,
            "median_importance": float(verdict.median_importance[j]),
            "rank": rank,
        })
    return rows


def write_report(path, verdict):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", "status", "hits", "iterations",
                         "median_importance", "rank"])
        for row in importance_ranking(verdict):
            writer.writerow([row["feature"], row["status"], str(row["hits"]),
                             str(row["iterations"]),
                             repr(row["median_importance"]),
                             str(row["rank"])])
