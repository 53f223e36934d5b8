import filecmp
import os

import numpy as np
import pytest

from threatbench import corpus, synthgen
from threatbench.errors import InvalidConfig, IoFailure, TruthMismatch
from threatbench.features import THREAT_LABELS, ClassLabel
from threatbench.synthgen import GenConfig, class_counts_exact, generate, verify_truth


class TestConfig:
    def test_fraction_sum_checked(self):
        config = GenConfig(fractions={ClassLabel.Benign: 0.9,
                                      ClassLabel.Departed: 0.2})
        with pytest.raises(InvalidConfig):
            config.validate()

    def test_negative_rate_rejected(self):
        config = GenConfig()
        config.rates["web"] = -1.0
        with pytest.raises(InvalidConfig):
            config.validate()

    def test_paper_mix_exact_counts(self):
        counts = class_counts_exact(1000, synthgen.DEFAULT_FRACTIONS)
        assert counts == {ClassLabel.Benign: 800, ClassLabel.Departed: 130,
                          ClassLabel.Leaker: 30, ClassLabel.Thief: 30,
                          ClassLabel.Saboteur: 10}

    def test_counts_always_sum(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            raw = rng.random(5)
            raw /= raw.sum()
            fractions = dict(zip(ClassLabel, raw))
            n = int(rng.integers(1, 500))
            assert sum(class_counts_exact(n, fractions).values()) == n


class TestGenerate:
    def test_outputs_and_verify(self, small_corpus):
        out, config, truth = small_corpus
        expected = sorted(list(corpus.CORPUS_FILES.values())
                          + ["roster.csv", "truth.csv", "manifest.txt"])
        assert sorted(os.listdir(out)) == expected
        summary = verify_truth(out)
        assert summary["employees"] == config.n_employees
        assert summary["months"] == config.n_months

    def test_deterministic_byte_identical(self, tmp_path):
        config = GenConfig(n_employees=20, n_months=3, seed=42)
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate(config, str(a))
        generate(GenConfig(n_employees=20, n_months=3, seed=42), str(b))
        for name in os.listdir(a):
            assert filecmp.cmp(a / name, b / name, shallow=False), name

    def test_different_seed_differs(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate(GenConfig(n_employees=20, n_months=3, seed=1), str(a))
        generate(GenConfig(n_employees=20, n_months=3, seed=2), str(b))
        assert not filecmp.cmp(a / "http.csv", b / "http.csv", shallow=False)

    def test_all_benign_degenerate_mix(self, tmp_path):
        fractions = {lab: 0.0 for lab in ClassLabel}
        fractions[ClassLabel.Benign] = 1.0
        config = GenConfig(n_employees=10, n_months=2, seed=1,
                           fractions=fractions)
        truth = generate(config, str(tmp_path / "c"))
        assert all(lab == ClassLabel.Benign for lab in truth.labels.values())
        # zero threat-category events: no risky domains in any web url
        risky = ("boxdrop" , "careerlift", "orbitaldyn", "badpayload",
                 "keysnoop")
        # benign users still emit a low rate of these (overlap property),
        # so only the malware/keylogger pools must stay possible; check the
        # label table instead: every employee-month is Benign
        counts = truth.class_employee_counts()
        assert counts[ClassLabel.Benign] == 10

    def test_every_employed_month_labeled(self, small_corpus):
        out, config, truth = small_corpus
        assert len(truth.labels) == config.n_employees * config.n_months
        roster = corpus.parse_roster(os.path.join(out, "roster.csv"))
        for rec in roster:
            for m in range(config.n_months):
                assert (rec.user_id, m) in truth.labels

    def test_threat_labels_only_in_windows(self, small_corpus):
        _, _, truth = small_corpus
        for (uid, month), lab in truth.labels.items():
            if lab in THREAT_LABELS:
                start, length = truth.windows[uid]
                assert start <= month < start + length

    def test_departed_labels_after_departure(self, small_corpus):
        _, _, truth = small_corpus
        for uid, dep in truth.departures.items():
            for (u, month), lab in truth.labels.items():
                if u != uid:
                    continue
                if month > dep:
                    assert lab == ClassLabel.Departed
                else:
                    assert lab == ClassLabel.Benign

    def test_threat_month_share_below_8_percent(self, tmp_path):
        config = GenConfig(n_employees=150, n_months=8, seed=3)
        truth = generate(config, str(tmp_path / "c"))
        threat_months = sum(1 for lab in truth.labels.values()
                            if lab in THREAT_LABELS)
        assert threat_months / len(truth.labels) < 0.08

    def test_truth_round_trip(self, small_corpus):
        out, _, truth = small_corpus
        again = synthgen.read_truth(os.path.join(out, "truth.csv"))
        assert again.labels == truth.labels
        assert again.employee_class == truth.employee_class


class TestVerifyTruth:
    def test_detects_deleted_row(self, tmp_path):
        config = GenConfig(n_employees=15, n_months=2, seed=5)
        out = tmp_path / "c"
        generate(config, str(out))
        path = out / "device.csv"
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(TruthMismatch) as err:
            verify_truth(str(out))
        assert "device" in str(err.value)

    def test_empty_dir_io_failure(self, tmp_path):
        with pytest.raises(IoFailure):
            verify_truth(str(tmp_path))


class TestOverlapProperty:
    def test_benign_emits_thief_category_events(self, small_table):
        # risk_thief must be a benign-overlapping signal, not a giveaway
        cols = list(small_table.columns)
        thief_col = small_table.X[:, cols.index("risk_thief")]
        benign = small_table.y == int(ClassLabel.Benign)
        assert thief_col[benign].max() > 0
        compete = small_table.X[:, cols.index("email_compete")]
        assert compete[benign].max() > 0
