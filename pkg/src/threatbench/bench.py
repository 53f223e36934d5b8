"""Classifier benchmarking: repeated CV, metrics, rankings, PRI baseline.

Balancing is applied to training folds only; accuracy and kappa are medians
across the test folds, and confusion matrices aggregate all test folds.
Wall times feed a compressive (0, 1] time score via log(1 + milliseconds)
normalized by the slowest method, so sub-second runs stay well-defined.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from .classifiers import FAMILY, MODEL_LABEL, fit, predict
from .errors import (
    BudgetExceedsRows,
    EmptyMatrix,
    NonPositiveTime,
    NoRowsForClass,
    NoThreats,
)
from .features import THREAT_LABELS, ClassLabel
from .sampling import kfold, oversample, undersample


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (actual, predicted)
    classes: tuple      # class codes, row/column order

    @classmethod
    def from_predictions(cls, actual, predicted, classes=None):
        actual = np.asarray(actual)
        predicted = np.asarray(predicted)
        if classes is None:
            classes = tuple(sorted(set(actual.tolist())
                                   | set(predicted.tolist())))
        pos = {c: i for i, c in enumerate(classes)}
        counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for a, p in zip(actual, predicted):
            counts[pos[a], pos[p]] += 1
        return cls(counts, tuple(classes))

    @property
    def total(self):
        return int(self.counts.sum())


def accuracy(cm):
    """Trace over total."""
    total = cm.counts.sum()
    if total <= 0:
        raise EmptyMatrix("empty confusion matrix")
    return float(np.trace(cm.counts) / total)


def cohen_kappa(cm):
    """(p_o - p_e) / (1 - p_e); zero by convention when p_e is one."""
    total = cm.counts.sum()
    if total <= 0:
        raise EmptyMatrix("empty confusion matrix")
    p_o = np.trace(cm.counts) / total
    rows = cm.counts.sum(axis=1)
    cols = cm.counts.sum(axis=0)
    p_e = float(np.dot(rows, cols)) / (total * total)
    if p_e >= 1.0:
        return 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def time_score(times):
    """log(1 + ms) for each method, normalized so the slowest scores 1."""
    values = np.asarray(list(times), dtype=np.float64)
    if values.size == 0:
        raise NonPositiveTime("no times given")
    if np.any(values <= 0):
        raise NonPositiveTime("wall times must be positive")
    rescaled = np.log1p(values * 1000.0)
    return rescaled / rescaled.max()


@dataclass
class BenchmarkResult:
    method: str
    family: str
    model_label: str
    median_accuracy: float
    median_kappa: float
    total_seconds: float
    time_score: float = float("nan")
    folds: int = 0


def _balance_train(table, indices, mode, n_per_class, seed):
    train = table.subset(indices)
    if mode == "over":
        return oversample(train, seed)
    if mode == "under":
        return undersample(train, n_per_class, seed)
    return train


def run_benchmark(specs, table, plan, timeout=None, sample_mode="none",
                  n_per_class=10, jobs=1):
    """Fit/predict every spec over all folds; never aborts the suite.

    Returns (results sorted by descending accuracy, {method: ConfusionMatrix},
    exclusions list of (method, reason)).
    """
    folds = kfold(table, plan)
    all_classes = tuple(int(c) for c in np.unique(table.y))
    results = []
    matrices = {}
    exclusions = []
    for spec in specs:
        method = spec.algorithm
        accs = []
        kappas = []
        elapsed = 0.0
        agg = np.zeros((len(all_classes), len(all_classes)), dtype=np.int64)
        failed = None
        for f_idx, (train_idx, test_idx) in enumerate(folds):
            if timeout is not None and elapsed > timeout:
                failed = f"timeout after {elapsed:.1f}s"
                break
            try:
                train = _balance_train(table, train_idx, sample_mode,
                                       n_per_class, seed=spec.seed + f_idx)
                test = table.subset(test_idx)
                t0 = time.perf_counter()
                model = fit(spec, train, jobs=jobs)
                labels, _ = predict(model, test)
                elapsed += time.perf_counter() - t0
            except Exception as exc:  # per-method failures are recorded
                failed = f"{type(exc).__name__}: {exc}"
                break
            cm = ConfusionMatrix.from_predictions(test.y, labels, all_classes)
            agg += cm.counts
            accs.append(accuracy(cm))
            kappas.append(cohen_kappa(cm))
        if timeout is not None and failed is None and elapsed > timeout:
            failed = f"timeout after {elapsed:.1f}s"
        if failed is not None:
            exclusions.append((method, failed))
            continue
        matrices[method] = ConfusionMatrix(agg, all_classes)
        results.append(BenchmarkResult(
            method, FAMILY[method], MODEL_LABEL[method],
            float(np.median(accs)), float(np.median(kappas)),
            elapsed, folds=len(folds)))

    if results:
        scores = time_score([r.total_seconds for r in results])
        for r, s in zip(results, scores):
            r.time_score = float(s)
    results.sort(key=lambda r: (-r.median_accuracy, r.method))
    return results, matrices, exclusions


def one_vs_benign_matrix(predictions, actual, threat_class):
    """Row-normalized 2x2 percentages for benign-vs-one-threat rows.

    Predictions of any other class count on the benign side; the returned
    false-assignment rate is off-diagonal count mass over total.
    """
    predictions = np.asarray(predictions)
    actual = np.asarray(actual)
    threat = int(threat_class)
    benign = int(ClassLabel.Benign)
    mask = (actual == benign) | (actual == threat)
    if not np.any(mask):
        raise NoRowsForClass(ClassLabel(threat).name)
    act = actual[mask]
    pred_threat = predictions[mask] == threat
    counts = np.zeros((2, 2), dtype=np.int64)
    counts[0, 0] = int(np.sum((act == benign) & ~pred_threat))
    counts[0, 1] = int(np.sum((act == benign) & pred_threat))
    counts[1, 0] = int(np.sum((act == threat) & ~pred_threat))
    counts[1, 1] = int(np.sum((act == threat) & pred_threat))
    row_sums = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        percent = np.where(row_sums > 0, 100.0 * counts / row_sums, 0.0)
    false_assignment = (counts[0, 1] + counts[1, 0]) / counts.sum()
    return percent, float(false_assignment)


def one_vs_benign_from_cm(cm, threat_class):
    """One-vs-benign percentages from an aggregated multiclass matrix.

    Agrees exactly with one_vs_benign_matrix on the underlying row
    predictions (any prediction other than the threat class counts as the
    benign side).
    """
    threat = int(threat_class)
    benign = int(ClassLabel.Benign)
    if benign not in cm.classes or threat not in cm.classes:
        raise NoRowsForClass(ClassLabel(threat).name)
    b = cm.classes.index(benign)
    t = cm.classes.index(threat)
    counts = np.zeros((2, 2), dtype=np.int64)
    counts[0, 1] = cm.counts[b, t]
    counts[0, 0] = cm.counts[b].sum() - counts[0, 1]
    counts[1, 1] = cm.counts[t, t]
    counts[1, 0] = cm.counts[t].sum() - counts[1, 1]
    if counts.sum() == 0:
        raise NoRowsForClass(ClassLabel(threat).name)
    row_sums = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        percent = np.where(row_sums > 0, 100.0 * counts / row_sums, 0.0)
    false_assignment = (counts[0, 1] + counts[1, 0]) / counts.sum()
    return percent, float(false_assignment)


PRI_INDICATORS = {
    "file_freq": "High monthly file activity",
    "risk_sabotage": "Malware or keylogger domain hits",
    "unauthorized_log": "Post-departure access",
    "email_compete": "Email to competitor domains",
    "device_freq": "Heavy removable-device use",
    "web_sentiment": "Negative web sentiment",
}


@dataclass
class PriResult:
    indicator: str
    metric_column: str
    budget: int
    false_accusation_rate: float
    eludes_detection_rate: float


def pri_baseline(table, indicator, budget):
    """Flag the top-K rows by one indicator and score the triage quality.

    Rows are ranked descending (ascending for web_sentiment, most negative
    first); false accusations are flagged benign-or-departed rows over K,
    eluded detections are unflagged threat rows over all threat rows.
    """
    if indicator not in PRI_INDICATORS:
        raise ValueError(f"indicator must be one of {sorted(PRI_INDICATORS)}")
    if budget > len(table):
        raise BudgetExceedsRows(f"K={budget} > {len(table)} rows")
    if budget < 1:
        raise ValueError("budget must be positive")
    y = table.y
    threat_mask = np.isin(y, [int(c) for c in THREAT_LABELS])
    n_threats = int(threat_mask.sum())
    if n_threats == 0:
        raise NoThreats("no threat-labeled rows")

    col = table.X[:, list(table.columns).index(indicator)]
    key = col if indicator == "web_sentiment" else -col
    order = np.argsort(key, kind="stable")
    flagged = np.zeros(len(table), dtype=bool)
    flagged[order[:budget]] = True

    false_acc = int(np.sum(flagged & ~threat_mask)) / budget
    eludes = int(np.sum(threat_mask & ~flagged)) / n_threats
    return PriResult(PRI_INDICATORS[indicator], indicator, budget,
                     float(false_acc), float(eludes))


def _fmt(x, digits=6):
    return f"{x:.{digits}f}"


def write_ranking_csv(path, results):
    """Deterministic ranking table (no wall-time columns)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "accuracy", "kappa", "family", "model"])
        for r in results:
            writer.writerow([r.method, _fmt(r.median_accuracy),
                             _fmt(r.median_kappa), r.family, r.model_label])


def write_timing_csv(path, results):
    """Wall times and time scores (machine-dependent, not reproducible)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "seconds", "time_score"])
        for r in results:
            writer.writerow([r.method, _fmt(r.total_seconds),
                             _fmt(r.time_score)])


def write_scatter_csv(path, results):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "family", "accuracy", "time_score"])
        for r in results:
            writer.writerow([r.method, r.family, _fmt(r.median_accuracy),
                             _fmt(r.time_score)])


def write_confusion_csv(path, percent, threat_class):
    name = ClassLabel(int(threat_class)).name
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["actual", "predicted_Benign", f"predicted_{name}"])
        writer.writerow(["Benign", _fmt(percent[0, 0], 3),
                         _fmt(percent[0, 1], 3)])
        writer.writerow([name, _fmt(percent[1, 0], 3),
                         _fmt(percent[1, 1], 3)])


def write_pri_csv(path, pri_results):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["indicator", "metric_column", "budget",
                         "false_accusation_rate", "eludes_detection_rate"])
        for r in pri_results:
            writer.writerow([r.indicator, r.metric_column, str(r.budget),
                             _fmt(r.false_accusation_rate),
                             _fmt(r.eludes_detection_rate)])


def _md_table(headers, rows):
    lines = ["| " + " | ".join(headers) + " |",
             "| " + " | ".join("---" for _ in headers) + " |"]
    for row in rows:
        lines.append("| " + " | ".join(str(v) for v in row) + " |")
    return "\n".join(lines)


def emit_reports(out_dir, results=None, matrices=None, exclusions=None,
                 pri_results=None, one_vs_benign=None, boruta_rows=None):
    """Write the CSV outputs plus report.md with a stable section order."""
    os.makedirs(out_dir, exist_ok=True)
    sections = ["# Benchmark report", ""]
    if results is not None:
        write_ranking_csv(os.path.join(out_dir, "ranking.csv"), results)
        write_timing_csv(os.path.join(out_dir, "timing.csv"), results)
        write_scatter_csv(os.path.join(out_dir, "scatter.csv"), results)
        sections += ["## Method ranking", "", _md_table(
            ["Method", "Accuracy", "Kappa", "Time (s)", "Time score",
             "Model"],
            [[r.method, _fmt(r.median_accuracy, 4), _fmt(r.median_kappa, 4),
              _fmt(r.total_seconds, 2), _fmt(r.time_score, 3), r.model_label]
             for r in results]), ""]
    if exclusions:
        sections += ["## Exclusions", ""]
        sections += [f"- {method}: {reason}" for method, reason in exclusions]
        sections += [""]
    if one_vs_benign:
        sections += ["## One-vs-benign confusion (percent)", ""]
        for threat_class, (percent, rate) in one_vs_benign.items():
            name = ClassLabel(int(threat_class)).name
            write_confusion_csv(
                os.path.join(out_dir, f"confusion_{name.lower()}.csv"),
                percent, threat_class)
            sections += [f"### Benign vs {name}", "", _md_table(
                ["actual \\ predicted", "Benign", name],
                [["Benign", _fmt(percent[0, 0], 2), _fmt(percent[0, 1], 2)],
                 [name, _fmt(percent[1, 0], 2), _fmt(percent[1, 1], 2)]]),
                "", f"False assignment rate: {_fmt(rate, 4)}", ""]
    if pri_results is not None:
        write_pri_csv(os.path.join(out_dir, "pri.csv"), pri_results)
        sections += ["## Single-indicator triage baseline", "", _md_table(
            ["Indicator", "Column", "K", "False accusations",
             "Eludes detection"],
            [[r.indicator, r.metric_column, r.budget,
              _fmt(r.false_accusation_rate, 4),
              _fmt(r.eludes_detection_rate, 4)] for r in pri_results]), ""]
    if boruta_rows is not None:
        sections += ["## Feature relevance ranking", "", _md_table(
            ["Rank", "Feature", "Status", "Hits", "Median importance"],
            [[row["rank"], row["feature"], row["status"],
              f"{row['hits']}/{row['iterations']}",
              _fmt(row["median_importance"], 5)] for row in boruta_rows]), ""]
    with open(os.path.join(out_dir, "report.md"), "w",
              encoding="utf-8") as fh:
        fh.write("\n".join(sections).rstrip() + "\n")
