"""Class rebalancing and deterministic cross-validation splits.

Both samplers only copy existing rows (no synthetic interpolation), so
every output row is bit-identical to some input row.  Inside cross
validation, balancing is applied to training folds only; test folds stay
at the natural class mix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyClassSet, InsufficientClassRows, TooFewRows
from .features import ClassLabel


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def oversample(table, seed):
    """Resample minority rows with replacement up to the majority count.

    All original rows are retained; the output row order is a deterministic
    shuffle of the enlarged index set.
    """
    if len(table) == 0 or table.y is None:
        raise EmptyClassSet("oversample needs a labeled, non-empty table")
    rng = _rng(seed)
    classes = np.unique(table.y)
    target = max(int(np.sum(table.y == c)) for c in classes)
    picked = []
    for c in classes:
        idx = np.nonzero(table.y == c)[0]
        picked.append(idx)
        deficit = target - len(idx)
        if deficit > 0:
            picked.append(rng.choice(idx, size=deficit, replace=True))
    indices = np.concatenate(picked)
    return table.subset(indices[rng.permutation(len(indices))])


def undersample(table, n_per_class, seed):
    """Exactly ``n_per_class`` rows per present class, without replacement."""
    if len(table) == 0 or table.y is None:
        raise EmptyClassSet("undersample needs a labeled, non-empty table")
    if n_per_class < 1:
        raise ValueError("n_per_class must be positive")
    rng = _rng(seed)
    picked = []
    for c in np.unique(table.y):
        idx = np.nonzero(table.y == c)[0]
        if len(idx) < n_per_class:
            raise InsufficientClassRows(
                f"{ClassLabel(int(c)).name}: {len(idx)} rows < {n_per_class}")
        picked.append(rng.choice(idx, size=n_per_class, replace=False))
    indices = np.concatenate(picked)
    return table.subset(indices[rng.permutation(len(indices))])


@dataclass(frozen=True)
class SplitPlan:
    """Repeated k-fold plan; folds are a pure function of (plan, table size)."""

    k: int = 5
    repeats: int = 3
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")


def kfold(table, plan):
    """(train_indices, test_indices) pairs, k x repeats of them.

    Within a repeat the test folds partition the rows; stratified plans
    keep per-class fold counts within one row of proportionality.
    """
    n = len(table)
    if n < plan.k:
        raise TooFewRows(f"{n} rows < {plan.k} folds")
    rng = _rng(plan.seed)
    pairs = []
    all_idx = np.arange(n)
    for _ in range(plan.repeats):
        fold_of = np.empty(n, dtype=np.int64)
        if plan.stratified and table.y is not None:
            for c in np.unique(table.y):
                idx = np.nonzero(table.y == c)[0]
                idx = idx[rng.permutation(len(idx))]
                fold_of[idx] = np.arange(len(idx)) % plan.k
        else:
            perm = rng.permutation(n)
            fold_of[perm] = np.arange(n) % plan.k
        for f in range(plan.k):
            test = all_idx[fold_of == f]
            train = all_idx[fold_of != f]
            pairs.append((train, test))
    return pairs
