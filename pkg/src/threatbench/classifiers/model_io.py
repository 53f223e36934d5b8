"""Versioned plain-text model persistence.

Floats are written in C99 hex so loads reproduce predictions exactly; trees
are serialized in preorder (their node ids are preorder-numbered).
"""

from __future__ import annotations

import ast

import numpy as np

from ..errors import SchemaMismatch
from . import TrainedModel
from .trees import Tree

_MAGIC = "threatbench-model 1"


def _hex(x):
    return float(x).hex()


def _w_vec(fh, name, arr):
    fh.write(name + " " + " ".join(_hex(v) for v in np.asarray(arr).ravel())
             + "\n")


def _w_mat(fh, name, arr):
    arr = np.asarray(arr, dtype=np.float64)
    fh.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
    for row in arr:
        fh.write(" ".join(_hex(v) for v in row) + "\n")


def _w_tree(fh, tree):
    fh.write(f"tree {tree.n_nodes}\n")
    for i in range(tree.n_nodes):
        counts = " ".join(_hex(c) for c in tree.counts[i])
        fh.write(f"{tree.feature[i]} {_hex(tree.threshold[i])} "
                 f"{tree.left[i]} {tree.right[i]} {counts}\n")


def dump_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_MAGIC + "\n")
        fh.write(f"algorithm {model.algorithm}\n")
        fh.write(f"seed {model.seed}\n")
        fh.write(f"degenerate {int(model.degenerate)}\n")
        fh.write(f"converged {int(model.converged)}\n")
        fh.write(f"fit_seconds {model.fit_seconds!r}\n")
        fh.write("columns " + ",".join(model.columns) + "\n")
        fh.write("classes " + ",".join(str(int(c)) for c in model.classes)
                 + "\n")
        fh.write(f"params {model.params!r}\n")
        if model.degenerate:
            return
        algo = model.algorithm
        if algo in ("cart", "random_forest", "extra_trees", "bagged_cart"):
            fh.write(f"trees {len(model.state)}\n")
            for tree in model.state:
                _w_tree(fh, tree)
        elif algo == "adaboost":
            trees, alphas = model.state
            fh.write(f"trees {len(trees)}\n")
            _w_vec(fh, "alphas", alphas)
            for tree in trees:
                _w_tree(fh, tree)
        elif algo == "knn":
            st = model.state
            fh.write(f"k {st['k']}\n")
            _w_vec(fh, "mean", st["mean"])
            _w_vec(fh, "std", st["std"])
            _w_mat(fh, "X", st["X"])
            fh.write("y " + " ".join(str(int(v)) for v in st["y"]) + "\n")
        elif algo == "gaussian_nb":
            st = model.state
            _w_vec(fh, "priors", st["priors"])
            _w_mat(fh, "means", st["means"])
            _w_mat(fh, "vars", st["vars"])
        elif algo == "multinom_logreg":
            st = model.state
            _w_vec(fh, "mean", st["mean"])
            _w_vec(fh, "std", st["std"])
            _w_mat(fh, "W", st["W"])
        elif algo == "shallow_mlp":
            st = model.state
            _w_vec(fh, "mean", st["mean"])
            _w_vec(fh, "std", st["std"])
            _w_mat(fh, "W1", st["W1"])
            _w_vec(fh, "b1", st["b1"])
            _w_mat(fh, "W2", st["W2"])
            _w_vec(fh, "b2", st["b2"])
        else:  # pragma: no cover
            raise ValueError(algo)


class _Reader:
    def __init__(self, fh):
        self.fh = fh

    def line(self):
        text = self.fh.readline()
        if not text:
            raise SchemaMismatch("truncated model file")
        return text.rstrip("\n")

    def tagged(self, tag):
        line = self.line()
        if not line.startswith(tag + " "):
            raise SchemaMismatch(f"expected {tag!r} line, got {line!r}")
        return line[len(tag) + 1:]

    def vec(self, tag):
        return np.array([float.fromhex(v) for v in self.tagged(tag).split()])

    def mat(self, tag):
        rows, _cols = (int(v) for v in self.tagged(tag).split())
        return np.array([[float.fromhex(v) for v in self.line().split()]
                         for _ in range(rows)])

    def tree(self):
        n = int(self.tagged("tree"))
        feature = np.empty(n, dtype=np.int32)
        threshold = np.empty(n, dtype=np.float64)
        left = np.empty(n, dtype=np.int32)
        right = np.empty(n, dtype=np.int32)
        counts = None
        for i in range(n):
            parts = self.line().split()
            feature[i] = int(parts[0])
            threshold[i] = float.fromhex(parts[1])
            left[i] = int(parts[2])
            right[i] = int(parts[3])
            row = [float.fromhex(v) for v in parts[4:]]
            if counts is None:
                counts = np.empty((n, len(row)))
            counts[i] = row
        return Tree(feature, threshold, left, right, counts)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        r = _Reader(fh)
        if r.line() != _MAGIC:
            raise SchemaMismatch("not a threatbench model file")
        algorithm = r.tagged("algorithm")
        seed = int(r.tagged("seed"))
        degenerate = bool(int(r.tagged("degenerate")))
        converged = bool(int(r.tagged("converged")))
        fit_seconds = float(r.tagged("fit_seconds"))
        columns = tuple(r.tagged("columns").split(","))
        classes = np.array([int(v) for v in r.tagged("classes").split(",")],
                           dtype=np.int64)
        params = ast.literal_eval(r.tagged("params"))
        model = TrainedModel(algorithm, columns, classes, None, params, seed,
                             degenerate=degenerate, converged=converged,
                             fit_seconds=fit_seconds)
        if degenerate:
            return model
        if algorithm in ("cart", "random_forest", "extra_trees",
                         "bagged_cart"):
            n = int(r.tagged("trees"))
            model.state = [r.tree() for _ in range(n)]
        elif algorithm == "adaboost":
            n = int(r.tagged("trees"))
            alphas = r.vec("alphas")
            model.state = ([r.tree() for _ in range(n)], alphas)
        elif algorithm == "knn":
            k = int(r.tagged("k"))
            mean = r.vec("mean")
            std = r.vec("std")
            X = r.mat("X")
            y = np.array([int(v) for v in r.tagged("y").split()],
                         dtype=np.int64)
            model.state = {"X": X, "y": y, "mean": mean, "std": std, "k": k}
        elif algorithm == "gaussian_nb":
            model.state = {"priors": r.vec("priors"), "means": r.mat("means"),
                           "vars": r.mat("vars")}
        elif algorithm == "multinom_logreg":
            model.state = {"mean": r.vec("mean"), "std": r.vec("std"),
                           "W": r.mat("W")}
        elif algorithm == "shallow_mlp":
            model.state = {"mean": r.vec("mean"), "std": r.vec("std"),
                           "W1": r.mat("W1"), "b1": r.vec("b1"),
                           "W2": r.mat("W2"), "b2": r.vec("b2")}
        else:
            raise SchemaMismatch(f"unknown algorithm {algorithm!r}")
        return model
