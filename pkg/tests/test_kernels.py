"""Backend equivalence: the numba kernels must reproduce the numpy
reference bit for bit (unweighted paths are integer-exact; the weighted
path matches on tie-free feature values)."""

import numpy as np
import pytest

from threatbench.kernels import numpy_impl

numba_impl = pytest.importorskip("threatbench.kernels.numba_impl")


def tie_heavy_data(rng, n=300, d=7, k=4):
    X = np.round(rng.normal(0, 3, size=(n, d))).astype(np.float64)
    y = rng.integers(0, k, size=n).astype(np.int64)
    return X, y, k


@pytest.mark.parametrize("mtry,random_thresh,bootstrap", [
    (7, False, False),   # cart-style
    (3, False, True),    # forest-style
    (3, True, False),    # extra-trees-style
    (7, False, True),    # bagging-style
])
def test_unweighted_trees_identical(mtry, random_thresh, bootstrap):
    rng = np.random.default_rng(0)
    for trial in range(8):
        X, y, k = tie_heavy_data(rng)
        seed = int(rng.integers(1, 2 ** 63))
        a = numpy_impl.build_tree(X, y, k, 30, 2, mtry, random_thresh,
                                  bootstrap, seed)
        b = numba_impl.build_tree(X, y, k, 30, 2, mtry, random_thresh,
                                  bootstrap, np.uint64(seed))
        for u, v, name in zip(a, b, ("feature", "threshold", "left",
                                     "right", "counts")):
            assert np.array_equal(u, v), (trial, name)


def test_weighted_trees_identical_on_tie_free_values():
    rng = np.random.default_rng(1)
    for _ in range(8):
        n, d, k = 250, 5, 3
        X = rng.normal(size=(n, d))
        y = rng.integers(0, k, size=n).astype(np.int64)
        w = rng.random(n) + 0.05
        a = numpy_impl.build_tree_weighted(X, y, w, k, 3, 2)
        b = numba_impl.build_tree_weighted(X, y, w, k, 3, 2)
        for u, v in zip(a, b):
            assert np.array_equal(u, v)


def test_apply_identical():
    rng = np.random.default_rng(2)
    X, y, k = tie_heavy_data(rng, n=500)
    tree = numpy_impl.build_tree(X, y, k, 12, 2, 3, False, True, 42)
    probe = np.round(rng.normal(0, 3, size=(200, X.shape[1])))
    a = numpy_impl.apply_tree(probe, *tree[:4])
    b = numba_impl.apply_tree(probe, *tree[:4])
    assert np.array_equal(a, b)


def test_depth_limit_respected():
    rng = np.random.default_rng(3)
    X, y, k = tie_heavy_data(rng)
    feat, thr, left, right, counts = numpy_impl.build_tree(
        X, y, k, 3, 2, X.shape[1], False, False, 0)

    def depth(node, d=0):
        if feat[node] < 0:
            return d
        return max(depth(left[node], d + 1), depth(right[node], d + 1))

    assert depth(0) <= 3


def test_leaf_counts_partition_samples():
    rng = np.random.default_rng(4)
    X, y, k = tie_heavy_data(rng, n=400)
    feat, thr, left, right, counts = numpy_impl.build_tree(
        X, y, k, 30, 2, X.shape[1], False, False, 0)
    leaves = numpy_impl.apply_tree(X, feat, thr, left, right)
    # every training row lands in a leaf whose distribution includes its class
    for i in range(len(X)):
        assert counts[leaves[i], y[i]] > 0
    leaf_ids = np.flatnonzero(feat < 0)
    assert counts[leaf_ids].sum() == len(X)
