import numpy as np
import pytest

from conftest import random_table
from threatbench.errors import (
    EmptyClassSet,
    InsufficientClassRows,
    TooFewRows,
)
from threatbench.sampling import SplitPlan, kfold, oversample, undersample


def row_set(table):
    return {tuple(row) for row in table.X}


class TestOversample:
    def test_equalizes_counts(self):
        rng = np.random.default_rng(0)
        t = random_table(rng, 110, n_classes=2)
        t.y[:] = 0
        t.y[:10] = 1
        out = oversample(t, seed=1)
        counts = np.bincount(out.y)
        assert counts[0] == counts[1] == 100
        # all ten minority originals retained
        minority = {tuple(r) for r in t.X[t.y == 1]}
        assert minority <= row_set(out)

    def test_balanced_is_fixpoint_multiset(self):
        rng = np.random.default_rng(1)
        t = random_table(rng, 100, n_classes=2)
        t.y[:50] = 0
        t.y[50:] = 1
        out = oversample(t, seed=3)
        assert len(out) == 100
        assert sorted(map(tuple, out.X)) == sorted(map(tuple, t.X))

    def test_no_fabricated_rows(self):
        rng = np.random.default_rng(2)
        for trial in range(20):
            t = random_table(rng, int(rng.integers(10, 200)), n_classes=4)
            out = oversample(t, seed=trial)
            assert row_set(out) <= row_set(t)

    def test_statistics_preserved(self):
        # resampling with replacement keeps per-feature moments within 10%
        # relative (count-like features with nonzero variance), seed sweep
        rng = np.random.default_rng(3)
        t = random_table(rng, 1000, n_classes=2, d=4)
        t.X[:] = rng.poisson(6.0, size=t.X.shape)
        t.y[:] = 0
        t.y[:80] = 1
        orig = t.X[t.y == 1]
        for seed in range(10):
            out = oversample(t, seed=seed)
            smp = out.X[out.y == 1]
            rel_mean = np.abs(smp.mean(axis=0) / orig.mean(axis=0) - 1.0)
            rel_std = np.abs(smp.std(axis=0) / orig.std(axis=0) - 1.0)
            assert np.all(rel_mean < 0.10)
            assert np.all(rel_std < 0.10)

    def test_empty_rejected(self):
        rng = np.random.default_rng(4)
        t = random_table(rng, 0)
        with pytest.raises(EmptyClassSet):
            oversample(t, seed=0)


class TestUndersample:
    def test_ten_per_class_five_classes(self):
        rng = np.random.default_rng(5)
        t = random_table(rng, 500, n_classes=5)
        out = undersample(t, 10, seed=0)
        assert len(out) == 50
        assert all(c == 10 for c in np.bincount(out.y))

    def test_insufficient_rows_names_class(self):
        rng = np.random.default_rng(6)
        t = random_table(rng, 30, n_classes=2)
        t.y[:] = 0
        t.y[:7] = 1
        with pytest.raises(InsufficientClassRows) as err:
            undersample(t, 10, seed=0)
        assert "Departed" in str(err.value)  # class code 1

    def test_exact_min_passes_through_complete(self):
        rng = np.random.default_rng(7)
        t = random_table(rng, 40, n_classes=2)
        t.y[:] = 0
        t.y[:12] = 1
        out = undersample(t, 12, seed=0)
        minority = sorted(map(tuple, t.X[t.y == 1]))
        assert sorted(map(tuple, out.X[out.y == 1])) == minority

    def test_sample_without_replacement(self):
        rng = np.random.default_rng(8)
        t = random_table(rng, 200, n_classes=3)
        out = undersample(t, 20, seed=9)
        assert len(set(map(tuple, out.X))) == len(out)


class TestKfold:
    def test_sizes(self):
        rng = np.random.default_rng(9)
        t = random_table(rng, 100, labeled=False)
        pairs = kfold(t, SplitPlan(k=5, repeats=1, seed=0, stratified=False))
        assert len(pairs) == 5
        for train, test in pairs:
            assert len(test) == 20
            assert len(train) == 80

    def test_stratified_proportions(self):
        rng = np.random.default_rng(10)
        t = random_table(rng, 100, n_classes=2)
        t.y[:80] = 0
        t.y[80:] = 1
        pairs = kfold(t, SplitPlan(k=5, repeats=1, seed=1))
        for _, test in pairs:
            counts = np.bincount(t.y[test], minlength=2)
            assert counts[0] == 16 and counts[1] == 4

    def test_partition_per_repeat(self):
        rng = np.random.default_rng(11)
        t = random_table(rng, 83, n_classes=3)
        plan = SplitPlan(k=4, repeats=3, seed=2)
        pairs = kfold(t, plan)
        assert len(pairs) == 12
        for r in range(3):
            seen = np.concatenate([test for _, test in pairs[r * 4:(r + 1) * 4]])
            assert sorted(seen) == list(range(83))
        for train, test in pairs:
            assert not set(train) & set(test)

    def test_deterministic(self):
        rng = np.random.default_rng(12)
        t = random_table(rng, 60, n_classes=2)
        a = kfold(t, SplitPlan(k=3, repeats=2, seed=7))
        b = kfold(t, SplitPlan(k=3, repeats=2, seed=7))
        for (ta, sa), (tb, sb) in zip(a, b):
            assert np.array_equal(ta, tb) and np.array_equal(sa, sb)

    def test_too_few_rows(self):
        rng = np.random.default_rng(13)
        t = random_table(rng, 3)
        with pytest.raises(TooFewRows):
            kfold(t, SplitPlan(k=5, repeats=1, seed=0))


class TestRandomizedProperties:
    def test_five_hundred_trials_zero_violations(self):
        rng = np.random.default_rng(99)
        for trial in range(500):
            n_classes = int(rng.integers(2, 6))
            n = int(rng.integers(n_classes * 3, 120))
            t = random_table(rng, n, n_classes=n_classes)
            present = np.unique(t.y)

            over = oversample(t, seed=trial)
            counts = {c: int(np.sum(over.y == c)) for c in present}
            assert len(set(counts.values())) == 1
            assert row_set(over) <= row_set(t)
            for c in present:
                assert {tuple(r) for r in t.X[t.y == c]} <= \
                    {tuple(r) for r in over.X[over.y == c]}

            n_min = min(int(np.sum(t.y == c)) for c in present)
            if n_min >= 2:
                under = undersample(t, n_min, seed=trial)
                assert all(int(np.sum(under.y == c)) == n_min
                           for c in present)
                assert row_set(under) <= row_set(t)

            k = int(rng.integers(2, min(6, n) + 1))
            pairs = kfold(t, SplitPlan(k=k, repeats=2, seed=trial))
            for r in range(2):
                tests = np.concatenate(
                    [test for _, test in pairs[r * k:(r + 1) * k]])
                assert sorted(tests) == list(range(n))
