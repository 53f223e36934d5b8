"""Shared decision-tree machinery: impurity, flat trees, importance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import EmptyNode


def gini(class_counts):
    """Gini impurity 1 - sum(p_i^2) of a count vector."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0 or np.any(counts < 0):
        raise EmptyNode("counts must be nonnegative and nonempty")
    total = counts.sum()
    if total <= 0:
        raise EmptyNode("all-zero count vector")
    p = counts / total
    return float(1.0 - np.dot(p, p))


@dataclass
class Tree:
    """Flat preorder-numbered tree; ``feature`` is -1 at leaves."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # per-node class counts (weighted for boosted trees)

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def n_leaves(self):
        return int(np.sum(self.feature < 0))

    def apply(self, X):
        """Leaf node id per row."""
        return kernels.apply_tree(X, self.feature, self.threshold,
                                  self.left, self.right)

    def leaf_labels(self):
        """Majority class per node (ties to the lowest class index)."""
        return np.argmax(self.counts, axis=1)

    def predict_labels(self, X):
        return self.leaf_labels()[self.apply(X)]

    def importance(self, n_features):
        """Summed impurity decrease per feature (unnormalized)."""
        imp = np.zeros(n_features)
        internal = np.nonzero(self.feature >= 0)[0]
        if internal.size == 0:
            return imp
        tot = self.counts.sum(axis=1)
        sq = np.sum(self.counts * self.counts, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(tot > 0, 1.0 - sq / (tot * tot), 0.0)
        li = self.left[internal]
        ri = self.right[internal]
        decrease = (tot[internal] * g[internal]
                    - tot[li] * g[li] - tot[ri] * g[ri])
        np.add.at(imp, self.feature[internal], decrease)
        return imp


def grow_tree(X, y, n_classes, max_depth, min_split, mtry, random_thresh,
              bootstrap, seed):
    """Kernel-backed tree construction; ``seed`` feeds the in-kernel PRNG."""
    out = kernels.build_tree(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64),
        n_classes, max_depth, min_split, mtry,
        random_thresh, bootstrap, np.uint64(seed))
    return Tree(*out)


def grow_tree_weighted(X, y, weights, n_classes, max_depth, min_split):
    out = kernels.build_tree_weighted(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        n_classes, max_depth, min_split)
    return Tree(*out)


@dataclass
class TreeNode:
    """Linked view of one node, for inspection and rule walking."""

    feature: int
    threshold: float
    distribution: np.ndarray  # normalized class distribution at this node
    support: float
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self):
        return self.left is None


def as_nodes(tree, index=0):
    """Materialize the flat arrays as linked TreeNode objects."""
    counts = tree.counts[index]
    total = counts.sum()
    dist = counts / total if total > 0 else counts
    node = TreeNode(int(tree.feature[index]), float(tree.threshold[index]),
                    dist, float(total))
    if tree.feature[index] >= 0:
        node.left = as_nodes(tree, int(tree.left[index]))
        node.right = as_nodes(tree, int(tree.right[index]))
    return node
