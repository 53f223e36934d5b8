"""Command-line pipeline: gen, extract, balance, boruta, bench, pri, rules,
report, and the end-to-end ``all`` chain.

Exit codes: 0 success, 1 usage/config error, 2 data error (bad schema,
missing corpus, truth mismatch), 3 internal failure.  Diagnostics go to
stderr; data goes to files only.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from importlib import resources

import numpy as np

from . import bench as bench_mod
from . import corpus, features, sampling, selection, synthgen
from .classifiers import ALGORITHMS, ClassifierSpec, fit
from .classifiers.model_io import dump_model
from .classifiers.rules import extract_rules, write_rules_csv, write_rules_text
from .errors import ThreatbenchError, UnknownKey
from .features import ClassLabel

CONFIG_KEYS = {
    "employees": int,
    "months": int,
    "seed": int,
    "sample": str,
    "k": int,
    "repeats": int,
    "suite": str,
    "budget": int,
    "timeout": float,
    "jobs": int,
    "iterations": int,
    "alpha": float,
    "n_per_class": int,
    "intensity": float,
    "max_rows": int,
}

DEFAULTS = {
    "employees": 200,
    "months": 12,
    "seed": 7,
    "sample": "over",
    "k": 5,
    "repeats": 3,
    "suite": "all",
    "budget": 100,
    "timeout": 3600.0,
    "jobs": 1,
    "iterations": 100,
    "alpha": 0.01,
    "n_per_class": 10,
    "intensity": 1.0,
    "max_rows": 5000,
}


def load_config(path, flags):
    """Merge defaults < config file < explicit flags; unknown keys error."""
    merged = dict(DEFAULTS)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UnknownKey(f"line {line_no}: expected key = value")
                key, _, value = line.partition("=")
                key = key.strip()
                value = value.strip()
                if key not in CONFIG_KEYS:
                    raise UnknownKey(key)
                caster = CONFIG_KEYS[key]
                try:
                    merged[key] = caster(value)
                except ValueError:
                    raise TypeError(
                        f"config key {key!r}: expected "
                        f"{caster.__name__}, got {value!r}") from None
    for key, value in flags.items():
        if key in CONFIG_KEYS and value is not None:
            merged[key] = value
    return merged


def _log(msg):
    print(msg, file=sys.stderr)


def _data_file(name):
    return str(resources.files("threatbench") / "data" / name)


def _load_tables(args):
    domains = corpus.load_domain_categories(
        getattr(args, "domains", None) or _data_file("domains.csv"))
    lexicon = corpus.load_lexicon(
        getattr(args, "lexicon", None) or _data_file("lexicon.tsv"))
    names = corpus.load_names(
        getattr(args, "names", None) or _data_file("names.csv"))
    return domains, lexicon, names


def _parse_fractions(text):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != len(ClassLabel):
        raise ValueError(f"expected {len(ClassLabel)} fractions")
    return dict(zip(ClassLabel, parts))


def _suite_specs(suite, seed):
    if suite == "all":
        names = list(ALGORITHMS)
    else:
        names = [s.strip() for s in suite.split(",") if s.strip()]
    return [ClassifierSpec(name, seed=seed) for name in names]


def cmd_gen(cfg, args):
    config = synthgen.GenConfig(
        n_employees=cfg["employees"], n_months=cfg["months"],
        seed=cfg["seed"], threat_intensity=cfg["intensity"])
    if args.fractions:
        config.fractions = _parse_fractions(args.fractions)
    truth = synthgen.generate(config, args.out)
    counts = truth.class_employee_counts()
    _log(f"gen: {cfg['employees']} employees x {cfg['months']} months "
         f"-> {args.out}")
    _log("gen: employee classes " +
         ", ".join(f"{lab.name}={counts[lab]}" for lab in ClassLabel))
    return 0


def _months_for(corpus_dir, months_flag):
    if months_flag is not None:
        return range(0, months_flag)
    manifest = os.path.join(corpus_dir, "manifest.txt")
    if os.path.isfile(manifest):
        meta, _, _ = synthgen.read_manifest(manifest)
        if "months" in meta:
            return range(0, meta["months"])
    truth_path = os.path.join(corpus_dir, "truth.csv")
    if os.path.isfile(truth_path):
        truth = synthgen.read_truth(truth_path)
        return range(0, truth.n_months)
    raise ThreatbenchError(
        "cannot infer month range; pass --months explicitly")


def cmd_extract(cfg, args):
    corpus_dir = args.corpus
    roster_path = os.path.join(corpus_dir, "roster.csv")
    if not os.path.isfile(roster_path):
        raise ThreatbenchError(f"{corpus_dir}: no roster.csv")
    roster = corpus.parse_roster(roster_path)
    domains, lexicon, names = _load_tables(args)
    months = _months_for(corpus_dir, args.months)
    counters = {}
    events = corpus.iter_corpus_events(
        corpus_dir, on_error="skip" if args.skip_malformed else "raise")
    table = features.extract(events, roster, domains, lexicon, names, months,
                             on_unknown_user=args.unknown_user,
                             counters=counters)
    truth_path = os.path.join(corpus_dir, "truth.csv")
    if os.path.isfile(truth_path):
        truth = synthgen.read_truth(truth_path)
        table = features.attach_labels(table, truth)
    features.write_table(table, args.out)
    _log(f"extract: {len(table)} rows -> {args.out} "
         f"(skipped: {counters.get('unknown_user', 0)} unknown users, "
         f"{counters.get('out_of_range', 0)} out-of-range events)")
    return 0


def cmd_balance(cfg, args):
    table = features.read_table(args.features)
    if cfg["sample"] == "over":
        out = sampling.oversample(table, cfg["seed"])
    elif cfg["sample"] == "under":
        out = sampling.undersample(table, cfg["n_per_class"], cfg["seed"])
    else:
        raise ThreatbenchError("balance mode must be over or under")
    features.write_table(out, args.out)
    _log(f"balance: {len(table)} -> {len(out)} rows ({cfg['sample']}) "
         f"-> {args.out}")
    return 0


def _boruta_table(table, cfg):
    """Balanced, size-capped view of the table for relevance testing."""
    balanced = sampling.oversample(table, cfg["seed"] + 101)
    cap = cfg["max_rows"]
    if len(balanced) > cap:
        per_class = max(2, cap // len(np.unique(balanced.y)))
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(cfg["seed"] + 202)))
        picked = []
        for c in np.unique(balanced.y):
            idx = np.nonzero(balanced.y == c)[0]
            take = min(per_class, len(idx))
            picked.append(rng.choice(idx, size=take, replace=False))
        balanced = balanced.subset(np.sort(np.concatenate(picked)))
    return balanced


def cmd_boruta(cfg, args):
    table = features.read_table(args.features)
    if table.y is None:
        raise ThreatbenchError("boruta needs a labeled feature table")
    work = _boruta_table(table, cfg) if args.balance == "over" else table
    config = selection.BorutaConfig(iterations=cfg["iterations"],
                                    alpha=cfg["alpha"], seed=cfg["seed"])
    verdict = selection.boruta(work, config)
    os.makedirs(args.out, exist_ok=True)
    report = os.path.join(args.out, "boruta_report.csv")
    selection.write_report(report, verdict)
    _log(f"boruta: confirmed {len(verdict.confirmed())}, rejected "
         f"{len(verdict.rejected())}, tentative {len(verdict.tentative())} "
         f"-> {report}")
    return 0


def _run_bench(cfg, table, jobs):
    specs = _suite_specs(cfg["suite"], cfg["seed"])
    plan = sampling.SplitPlan(k=cfg["k"], repeats=cfg["repeats"],
                              seed=cfg["seed"])
    return bench_mod.run_benchmark(
        specs, table, plan, timeout=cfg["timeout"],
        sample_mode=cfg["sample"], n_per_class=cfg["n_per_class"], jobs=jobs)


def _ovb_from_matrices(matrices):
    """One-vs-benign tables for the best available voting-forest method."""
    for method in ("random_forest", "extra_trees", "bagged_cart", "cart"):
        if method in matrices:
            cm = matrices[method]
            out = {}
            for lab in (ClassLabel.Departed, ClassLabel.Leaker,
                        ClassLabel.Thief, ClassLabel.Saboteur):
                if int(lab) in cm.classes:
                    out[int(lab)] = bench_mod.one_vs_benign_from_cm(cm, lab)
            return method, out
    return None, None


def cmd_bench(cfg, args):
    table = features.read_table(args.features)
    if table.y is None:
        raise ThreatbenchError("bench needs a labeled feature table")
    results, matrices, exclusions = _run_bench(cfg, table, cfg["jobs"])
    _, ovb = _ovb_from_matrices(matrices)
    bench_mod.emit_reports(args.out, results=results, matrices=matrices,
                           exclusions=exclusions, one_vs_benign=ovb)
    _log(f"bench: {len(results)} methods ranked, "
         f"{len(exclusions)} excluded -> {args.out}")
    for r in results:
        _log(f"  {r.method:18s} acc={r.median_accuracy:.4f} "
             f"kappa={r.median_kappa:.4f} time={r.total_seconds:.2f}s")
    for method, reason in exclusions:
        _log(f"  {method:18s} EXCLUDED: {reason}")
    return 0


def cmd_pri(cfg, args):
    table = features.read_table(args.features)
    if table.y is None:
        raise ThreatbenchError("pri needs a labeled feature table")
    out_rows = [bench_mod.pri_baseline(table, ind, cfg["budget"])
                for ind in bench_mod.PRI_INDICATORS]
    os.makedirs(args.out, exist_ok=True)
    bench_mod.write_pri_csv(os.path.join(args.out, "pri.csv"), out_rows)
    _log(f"pri: {len(out_rows)} indicators at K={cfg['budget']} "
         f"-> {args.out}/pri.csv")
    return 0


def cmd_rules(cfg, args):
    table = features.read_table(args.features)
    if table.y is None:
        raise ThreatbenchError("rules needs a labeled feature table")
    if cfg["sample"] == "over":
        train = sampling.oversample(table, cfg["seed"])
    elif cfg["sample"] == "under":
        train = sampling.undersample(table, cfg["n_per_class"], cfg["seed"])
    else:
        train = table
    spec = ClassifierSpec(args.algorithm, seed=cfg["seed"])
    model = fit(spec, train, jobs=cfg["jobs"])
    rules = extract_rules(model)
    os.makedirs(args.out, exist_ok=True)
    class_names = {int(lab): lab.name for lab in ClassLabel}
    write_rules_csv(os.path.join(args.out, "rules.csv"), rules,
                    columns=model.columns, class_names=class_names)
    write_rules_text(os.path.join(args.out, "rules.txt"), rules,
                     columns=model.columns, class_names=class_names)
    dump_model(model, os.path.join(args.out, "model.txt"))
    _log(f"rules: {len(rules)} rules from {args.algorithm} -> {args.out}")
    return 0


def _read_csv_rows(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(cfg, args):
    run = args.run
    ranking_path = os.path.join(run, "ranking.csv")
    results = None
    if os.path.isfile(ranking_path):
        timing = {}
        timing_path = os.path.join(run, "timing.csv")
        if os.path.isfile(timing_path):
            for row in _read_csv_rows(timing_path):
                timing[row["method"]] = (float(row["seconds"]),
                                         float(row["time_score"]))
        results = []
        for row in _read_csv_rows(ranking_path):
            secs, tscore = timing.get(row["method"], (float("nan"),) * 2)
            results.append(bench_mod.BenchmarkResult(
                row["method"], row["family"], row["model"],
                float(row["accuracy"]), float(row["kappa"]), secs, tscore))
    pri_rows = None
    pri_path = os.path.join(run, "pri.csv")
    if os.path.isfile(pri_path):
        pri_rows = [bench_mod.PriResult(
            row["indicator"], row["metric_column"], int(row["budget"]),
            float(row["false_accusation_rate"]),
            float(row["eludes_detection_rate"]))
            for row in _read_csv_rows(pri_path)]
    if results is None and pri_rows is None:
        raise ThreatbenchError(f"{run}: nothing to report on")
    bench_mod.emit_reports(run, results=results, pri_results=pri_rows)
    _log(f"report: {run}/report.md")
    return 0


def cmd_all(cfg, args):
    out = args.out
    os.makedirs(out, exist_ok=True)
    ns = argparse.Namespace(**vars(args))

    ns.out = os.path.join(out, "corpus")
    ns.fractions = getattr(args, "fractions", None)
    cmd_gen(cfg, ns)

    ns = argparse.Namespace(corpus=os.path.join(out, "corpus"),
                            out=os.path.join(out, "features.csv"),
                            months=None, unknown_user="raise",
                            skip_malformed=False, domains=None, lexicon=None,
                            names=None)
    cmd_extract(cfg, ns)
    features_path = os.path.join(out, "features.csv")

    balanced_path = os.path.join(out, "balanced.csv")
    table = features.read_table(features_path)
    balanced = sampling.oversample(table, cfg["seed"])
    features.write_table(balanced, balanced_path)
    _log(f"balance: {len(table)} -> {len(balanced)} rows -> {balanced_path}")

    ns = argparse.Namespace(features=features_path, out=out, balance="over")
    cmd_boruta(cfg, ns)
    boruta_rows = _read_csv_rows(os.path.join(out, "boruta_report.csv"))
    for row in boruta_rows:
        row["rank"] = int(row["rank"])
        row["hits"] = int(row["hits"])
        row["iterations"] = int(row["iterations"])
        row["median_importance"] = float(row["median_importance"])

    results, matrices, exclusions = _run_bench(cfg, table, cfg["jobs"])
    method, ovb = _ovb_from_matrices(matrices)
    bench_dir = os.path.join(out, "bench")
    bench_mod.emit_reports(bench_dir, results=results, matrices=matrices,
                           exclusions=exclusions, one_vs_benign=ovb)
    _log(f"bench: {len(results)} methods -> {bench_dir}")

    pri_rows = [bench_mod.pri_baseline(table, ind, min(cfg["budget"],
                                                       len(table)))
                for ind in bench_mod.PRI_INDICATORS]

    ns = argparse.Namespace(features=balanced_path, out=out,
                            algorithm="random_forest", sample="none")
    rules_cfg = dict(cfg)
    rules_cfg["sample"] = "none"
    cmd_rules(rules_cfg, ns)

    bench_mod.emit_reports(out, results=results, exclusions=exclusions,
                           pri_results=pri_rows, one_vs_benign=ovb,
                           boruta_rows=boruta_rows)
    _log(f"all: report -> {os.path.join(out, 'report.md')}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser():
    parser = _Parser(prog="threatbench",
                     description="Insider-threat classifier benchmark "
                                 "pipeline over CERT-style activity logs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    add_common(p)
    p.add_argument("--employees", type=int)
    p.add_argument("--months", type=int)
    p.add_argument("--intensity", type=float)
    p.add_argument("--fractions",
                   help="comma list: benign,departed,leaker,thief,saboteur")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("extract", help="corpus directory -> features.csv")
    add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--months", type=int)
    p.add_argument("--unknown-user", dest="unknown_user",
                   choices=("raise", "skip"), default="raise")
    p.add_argument("--skip-malformed", action="store_true")
    p.add_argument("--domains")
    p.add_argument("--lexicon")
    p.add_argument("--names")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("balance", help="over/under-sample a feature table")
    add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--sample", choices=("over", "under"))
    p.add_argument("--n-per-class", dest="n_per_class", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("boruta", help="all-relevant feature selection")
    add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--iterations", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--balance", choices=("over", "none"), default="over")
    p.add_argument("--max-rows", dest="max_rows", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_boruta)

    p = sub.add_parser("bench", help="rank the classifier suite under CV")
    add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--sample", choices=("over", "under", "none"))
    p.add_argument("--suite", help="'all' or comma list of algorithm ids")
    p.add_argument("--k", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--n-per-class", dest="n_per_class", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("pri", help="single-indicator triage baseline")
    add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--budget", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pri)

    p = sub.add_parser("rules", help="extract forest decision rules")
    add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--sample", choices=("over", "under", "none"))
    p.add_argument("--algorithm", default="random_forest",
                   choices=("cart", "random_forest", "extra_trees",
                            "bagged_cart"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("report", help="re-render report.md from a run dir")
    add_common(p)
    p.add_argument("--run", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("all", help="gen -> extract -> balance -> boruta -> "
                                   "bench -> pri -> rules -> report")
    add_common(p)
    p.add_argument("--employees", type=int)
    p.add_argument("--months", type=int)
    p.add_argument("--intensity", type=float)
    p.add_argument("--fractions")
    p.add_argument("--sample", choices=("over", "under", "none"))
    p.add_argument("--suite")
    p.add_argument("--k", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--max-rows", dest="max_rows", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_all)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _log(f"usage error: {exc}")
        return 1
    try:
        cfg = load_config(getattr(args, "config", None), vars(args))
    except (UnknownKey, TypeError) as exc:
        _log(f"config error: {exc}")
        return 1
    try:
        return args.func(cfg, args)
    except FileNotFoundError as exc:
        _log(f"data error: {exc}")
        return 2
    except ThreatbenchError as exc:
        _log(f"data error: {type(exc).__name__}: {exc}")
        return 2
    except Exception as exc:  # internal failure
        _log(f"internal error: {type(exc).__name__}: {exc}")
        return 3


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
