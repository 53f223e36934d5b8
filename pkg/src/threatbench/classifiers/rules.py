"""Root-to-leaf rule extraction from tree-ensemble models.

Each rule is the ordered conjunction of split conditions along one
root-to-leaf path.  Re-classifying rows by their matching rule per tree and
majority-voting across trees reproduces the model's predict exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import UnsupportedModel
from . import VOTING_TREE_ALGORITHMS, tree_ensemble


@dataclass(frozen=True)
class Rule:
    tree_index: int
    conditions: tuple  # of (feature_index, "<=" | ">", threshold)
    label: int         # predicted class code
    support: float     # training rows reaching the leaf
    confidence: float  # majority fraction at the leaf

    def text(self, columns=None, class_names=None):
        parts = [
            f"{columns[f] if columns else f'f{f}'} {op} {_fmt(thr)}"
            for f, op, thr in self.conditions
        ]
        label = class_names[self.label] if class_names else str(self.label)
        return (f"IF {' AND '.join(parts)} THEN {label} "
                f"(support={_fmt(self.support)}, "
                f"confidence={self.confidence:.4f})")


def _fmt(x):
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def extract_rules(model):
    """One Rule per root-to-leaf path per tree, in preorder."""
    if model.algorithm not in VOTING_TREE_ALGORITHMS:
        raise UnsupportedModel(
            f"rule extraction needs a majority-vote tree model, "
            f"not {model.algorithm}")
    trees = tree_ensemble(model)
    rules = []
    for t_idx, tree in enumerate(trees):
        stack = [(0, ())]
        while stack:
            node, conds = stack.pop()
            f = int(tree.feature[node])
            if f < 0:
                counts = tree.counts[node]
                total = float(counts.sum())
                enc = int(np.argmax(counts))
                confidence = float(counts[enc] / total) if total > 0 else 0.0
                if not conds:
                    # leaf-only tree: keep the conjunction non-empty with a
                    # tautology so downstream evaluation stays uniform
                    conds = ((0, "<=", np.inf),)
                rules.append(Rule(t_idx, conds, int(model.classes[enc]),
                                  total, confidence))
            else:
                thr = float(tree.threshold[node])
                stack.append((int(tree.right[node]), conds + ((f, ">", thr),)))
                stack.append((int(tree.left[node]), conds + ((f, "<=", thr),)))
    return rules


def classify_with_rules(rules, X, classes):
    """Majority vote of the per-tree matching rules (ties to lowest class)."""
    X = np.asarray(X, dtype=np.float64)
    classes = np.asarray(classes)
    n = X.shape[0]
    pos = {int(c): i for i, c in enumerate(classes)}
    votes = np.zeros((n, len(classes)))
    for rule in rules:
        mask = np.ones(n, dtype=bool)
        for f, op, thr in rule.conditions:
            if op == "<=":
                mask &= X[:, f] <= thr
            else:
                mask &= X[:, f] > thr
        votes[mask, pos[rule.label]] += 1.0
    return classes[np.argmax(votes, axis=1)]


def write_rules_csv(path, rules, columns=None, class_names=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rule_id", "conditions", "label", "support",
                         "confidence"])
        for i, rule in enumerate(rules):
            conds = " AND ".join(
                f"{columns[f] if columns else f'f{f}'} {op} {_fmt(thr)}"
                for f, op, thr in rule.conditions)
            label = class_names[rule.label] if class_names else str(rule.label)
            writer.writerow([str(i), conds, label, _fmt(rule.support),
                             f"{rule.confidence:.6f}"])


def write_rules_text(path, rules, columns=None, class_names=None):
    with open(path, "w", encoding="utf-8") as fh:
        for rule in rules:
            fh.write(rule.text(columns, class_names) + "\n")
