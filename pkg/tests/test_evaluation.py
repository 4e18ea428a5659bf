from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from notebench.evaluation import (
    Choice,
    LogUniform,
    SplitSpec,
    classification_report,
    optimal_threshold,
    pr_curve,
    randomized_search,
    roc_auc,
    stratified_kfold,
    stratified_split,
)


def allocation_oracle(count: int, ratios) -> list[int]:
    """Independent largest-remainder arithmetic (ties favor earlier parts)."""
    quotas = [count * r for r in ratios]
    base = [int(q) for q in quotas]
    remainders = [(q - b, -i) for i, (q, b) in enumerate(zip(quotas, base))]
    for _, neg_i in sorted(remainders, reverse=True)[: count - sum(base)]:
        base[-neg_i] += 1
    return base


class TestStratifiedSplit:
    def test_100_labels_18_positive(self):
        # oracle: largest-remainder arithmetic done by hand
        labels = np.array([1] * 18 + [0] * 82)
        train, valid, test = stratified_split(labels, SplitSpec(seed=42))
        assert (len(train), len(valid), len(test)) == (64, 16, 20)
        assert (int(labels[train].sum()), int(labels[valid].sum()), int(labels[test].sum())) == (11, 3, 4)

    def test_partition_properties(self):
        labels = np.array([0, 1] * 25)
        train, valid, test = stratified_split(labels, SplitSpec(seed=1))
        combined = np.concatenate([train, valid, test])
        assert np.array_equal(np.sort(combined), np.arange(50))

    def test_counts_depend_only_on_label_multiset(self):
        rng = np.random.default_rng(0)
        labels = np.array([1] * 13 + [0] * 87)
        shuffled = labels.copy()
        rng.shuffle(shuffled)
        for part_a, part_b in zip(
            stratified_split(labels, SplitSpec(seed=5)), stratified_split(shuffled, SplitSpec(seed=5))
        ):
            assert len(part_a) == len(part_b)

    def test_deterministic(self):
        labels = np.array([1] * 9 + [0] * 41)
        a = stratified_split(labels, SplitSpec(seed=7))
        b = stratified_split(labels, SplitSpec(seed=7))
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_empty_error(self):
        with pytest.raises(ValueError):
            stratified_split(np.array([]), SplitSpec(seed=0))

    @settings(max_examples=60, deadline=None)
    @given(
        n1=st.integers(min_value=1, max_value=120),
        n0=st.integers(min_value=1, max_value=120),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_matches_allocation_oracle(self, n1, n0, seed):
        labels = np.array([1] * n1 + [0] * n0)
        spec = SplitSpec(seed=seed)
        parts = stratified_split(labels, spec)
        for cls, n_cls in ((1, n1), (0, n0)):
            got = [int(np.sum(labels[p] == cls)) for p in parts]
            assert got == allocation_oracle(n_cls, spec.ratios)
        # realized proportions deviate from targets by less than one sample
        for p, ratio in zip(parts, spec.ratios):
            for cls, n_cls in ((1, n1), (0, n0)):
                assert abs(np.sum(labels[p] == cls) - ratio * n_cls) < 1.0

    def test_ratio_validation(self):
        with pytest.raises(ValueError):
            SplitSpec(ratios=(0.5, 0.3, 0.3))


class TestStratifiedKfold:
    def test_balanced_ten_samples(self):
        labels = np.array([0, 1] * 5)
        folds = stratified_kfold(labels, k=5, seed=0)
        for _, test_idx in folds:
            assert len(test_idx) == 2
            assert set(labels[test_idx]) == {0, 1}

    def test_disjoint_cover(self):
        labels = np.array([1] * 20 + [0] * 30)
        folds = stratified_kfold(labels, k=5, seed=3)
        seen = np.concatenate([t for _, t in folds])
        assert np.array_equal(np.sort(seen), np.arange(50))
        for train_idx, test_idx in folds:
            assert np.intersect1d(train_idx, test_idx).size == 0
            assert np.array_equal(np.sort(np.concatenate([train_idx, test_idx])), np.arange(50))

    def test_18_positives_fold_sizes(self):
        # oracle: balanced partition arithmetic, 18 = 4+4+4+3+3
        labels = np.array([1] * 18 + [0] * 82)
        folds = stratified_kfold(labels, k=5, seed=9)
        sizes = sorted((int(labels[t].sum()) for _, t in folds), reverse=True)
        assert sizes == [4, 4, 4, 3, 3]

    def test_class_smaller_than_k(self):
        labels = np.array([1] * 3 + [0] * 20)
        with pytest.raises(ValueError):
            stratified_kfold(labels, k=5, seed=0)


class TestPrCurve:
    def test_hand_example(self):
        # oracle: confusion counting by hand at t=0.5
        y = np.array([0, 0, 1, 1])
        s = np.array([0.2, 0.6, 0.5, 0.9])
        curve = pr_curve(y, s)
        assert len(curve) == 4
        i = int(np.flatnonzero(curve.thresholds == 0.5)[0])
        assert curve.precision[i] == pytest.approx(2 / 3, abs=1e-12)
        assert curve.recall[i] == pytest.approx(1.0, abs=1e-12)
        assert curve.f1[i] == pytest.approx(0.8, abs=1e-12)

    def test_perfect_scores_have_perfect_point(self):
        y = np.array([0, 0, 1, 1])
        s = np.array([0.1, 0.2, 0.8, 0.9])
        curve = pr_curve(y, s)
        assert np.any((curve.precision == 1.0) & (curve.recall == 1.0) & (curve.f1 == 1.0))

    def test_one_point_per_distinct_score(self):
        y = np.array([0, 1, 0, 1, 1])
        s = np.array([0.3, 0.3, 0.7, 0.7, 0.7])
        assert len(pr_curve(y, s)) == 2

    def test_f1_identity(self):
        rng = np.random.default_rng(1)
        y = (rng.random(40) < 0.4).astype(int)
        y[0], y[1] = 0, 1
        s = np.round(rng.random(40), 2)
        curve = pr_curve(y, s)
        for p, r, f in zip(curve.precision, curve.recall, curve.f1):
            expected = 0.0 if p + r == 0 else 2 * p * r / (p + r)
            assert f == pytest.approx(expected, abs=1e-12)

    def test_single_class_error(self):
        with pytest.raises(ValueError):
            pr_curve(np.array([1, 1]), np.array([0.1, 0.2]))


class TestOptimalThreshold:
    def test_hand_example(self):
        y = np.array([0, 0, 1, 1])
        s = np.array([0.2, 0.6, 0.5, 0.9])
        assert optimal_threshold(pr_curve(y, s)) == 0.5

    def test_all_scores_identical(self):
        y = np.array([0, 1])
        s = np.array([0.4, 0.4])
        assert optimal_threshold(pr_curve(y, s)) == 0.4

    @settings(max_examples=120, deadline=None)
    @given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=2**32 - 1))
    def test_matches_exhaustive_scan(self, n, seed):
        rng = np.random.default_rng(seed)
        y = (rng.random(n) < 0.5).astype(int)
        y[0], y[-1] = 0, 1
        s = np.round(rng.random(n), 2)
        got = optimal_threshold(pr_curve(y, s))
        best = None
        for t in np.unique(s):
            yhat = (s >= t).astype(int)
            tp = np.sum((y == 1) & (yhat == 1))
            fp = np.sum((y == 0) & (yhat == 1))
            fn = np.sum((y == 1) & (yhat == 0))
            prec = tp / (tp + fp) if tp + fp else 0.0
            rec = tp / (tp + fn) if tp + fn else 0.0
            f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
            if best is None or f1 > best[0] or (f1 == best[0] and t < best[1]):
                best = (f1, t)
        assert got == best[1]


def pair_counting_auc(y, s):
    """Brute-force Mann-Whitney oracle."""
    pos = s[y == 1]
    neg = s[y == 0]
    wins = sum(1.0 for p in pos for q in neg if p > q)
    ties = sum(1.0 for p in pos for q in neg if p == q)
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


class TestRocAuc:
    def test_hand_example(self):
        # oracle: pair enumeration 0+1+1+1 over 4 pairs
        y = np.array([0, 1, 0, 1])
        s = np.array([0.4, 0.3, 0.1, 0.8])
        assert roc_auc(y, s) == 0.75

    def test_all_ties(self):
        assert roc_auc(np.array([0, 1, 0, 1]), np.full(4, 0.3)) == 0.5

    def test_perfect_separation(self):
        assert roc_auc(np.array([0, 0, 1, 1]), np.array([0.1, 0.2, 0.7, 0.9])) == 1.0

    @settings(max_examples=150, deadline=None)
    @given(st.integers(min_value=2, max_value=50), st.integers(min_value=0, max_value=2**32 - 1))
    def test_matches_pair_counting_exactly(self, n, seed):
        rng = np.random.default_rng(seed)
        y = (rng.random(n) < 0.5).astype(int)
        y[0], y[-1] = 0, 1
        s = np.round(rng.random(n), 1)  # coarse grid forces ties
        assert roc_auc(y, s) == pair_counting_auc(y, s)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=2**32 - 1))
    def test_antisymmetry_under_negation(self, n, seed):
        rng = np.random.default_rng(seed)
        y = (rng.random(n) < 0.5).astype(int)
        y[0], y[-1] = 0, 1
        s = np.round(rng.random(n), 1)
        assert roc_auc(y, s) + roc_auc(y, -s) == pytest.approx(1.0, abs=1e-12)

    def test_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(8)
        y = (rng.random(30) < 0.4).astype(int)
        y[0], y[1] = 0, 1
        s = rng.random(30)
        assert roc_auc(y, s) == roc_auc(y, np.exp(3 * s))

    def test_single_class_error(self):
        with pytest.raises(ValueError):
            roc_auc(np.ones(3), np.array([0.1, 0.2, 0.3]))


class TestClassificationReport:
    def test_perfect_predictions(self):
        y = np.array([0, 1, 0, 1])
        report = classification_report(y, y, np.array([0.1, 0.9, 0.2, 0.8]))
        assert report.accuracy == 1.0
        assert report.precision1 == report.recall1 == report.f1_1 == 1.0
        assert report.precision0 == report.recall0 == report.f1_0 == 1.0
        assert report.auc_roc == 1.0

    def test_degenerate_all_negative_predictions(self):
        # mirrors a majority-class predictor at 18% prevalence
        y = np.array([1] * 18 + [0] * 82)
        yhat = np.zeros(100, dtype=int)
        scores = np.linspace(0, 0.4, 100)
        report = classification_report(y, yhat, scores)
        assert report.accuracy == pytest.approx(0.82, abs=1e-12)
        assert report.recall1 == 0.0
        assert report.precision1 == 0.0  # zero-denominator rule
        assert report.f1_1 == 0.0

    def test_hand_example(self):
        # oracle: confusion counting by hand
        y = np.array([0, 0, 1, 1])
        yhat = np.array([0, 1, 1, 1])
        report = classification_report(y, yhat, np.array([0.2, 0.6, 0.7, 0.8]))
        assert report.precision1 == pytest.approx(2 / 3, abs=1e-12)
        assert report.recall1 == 1.0
        assert report.f1_1 == pytest.approx(0.8, abs=1e-12)
        assert report.precision0 == 1.0
        assert report.recall0 == 0.5
        assert report.f1_0 == pytest.approx(2 / 3, abs=1e-12)
        assert report.accuracy == 0.75

    def test_metrics_consistent_with_confusion_counts(self):
        rng = np.random.default_rng(12)
        y = (rng.random(60) < 0.3).astype(int)
        y[0], y[1] = 0, 1
        s = rng.random(60)
        report = classification_report(y, (s >= 0.5).astype(int), s, threshold=0.5)
        n = report.tp + report.fp + report.tn + report.fn
        assert n == 60
        assert report.accuracy == pytest.approx((report.tp + report.tn) / n, abs=1e-12)
        if report.tp + report.fp:
            assert report.precision1 == pytest.approx(report.tp / (report.tp + report.fp), abs=1e-12)
        if report.tp + report.fn:
            assert report.recall1 == pytest.approx(report.tp / (report.tp + report.fn), abs=1e-12)

    def test_json_field_names(self):
        y = np.array([0, 1])
        doc = classification_report(y, y, np.array([0.1, 0.9]), threshold=0.5).to_json_dict()
        assert set(doc) == {"Accuracy", "Precision", "Recall", "F1-Score", "AUC-ROC", "Threshold", "Confusion"}
        assert set(doc["Precision"]) == {"0", "1"}
        assert set(doc["Confusion"]) == {"TP", "FP", "TN", "FN"}

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            classification_report(np.array([0, 1]), np.array([0]), np.array([0.5, 0.6]))


def _separable_dataset():
    rng = np.random.default_rng(21)
    x = np.concatenate([rng.uniform(-2, -0.5, 10), rng.uniform(0.5, 2, 10)])
    y = np.array([0] * 10 + [1] * 10)
    return x.reshape(-1, 1), y


class TestRandomizedSearch:
    def test_single_candidate_returned(self):
        X, y = _separable_dataset()
        result = randomized_search("logreg", {"lam": Choice((0.01,))}, 1, y, X, k=5, seed=0)
        assert result.best_params == {"lam": 0.01}
        assert len(result.table) == 1

    def test_zero_learning_rate_loses_on_separable_data(self):
        # oracle: direct CV evaluation of both candidates; lr=0 predicts the
        # base rate only, so the boosted candidate must win
        X, y = _separable_dataset()
        space = {
            "learning_rate": Choice((0.0, 0.5)),
            "n_trees": Choice((10,)),
            "max_depth": Choice((2,)),
        }
        result = randomized_search("gbdt", space, 8, y, X, k=5, seed=0)
        sampled = {row["params"]["learning_rate"] for row in result.table}
        assert sampled == {0.0, 0.5}, "seed must sample both candidates"
        assert result.best_params["learning_rate"] == 0.5
        zero_rows = [r for r in result.table if r["params"]["learning_rate"] == 0.0]
        live_rows = [r for r in result.table if r["params"]["learning_rate"] == 0.5]
        assert max(r["mean_f1"] for r in zero_rows) < min(r["mean_f1"] for r in live_rows)

    def test_deterministic_given_seed(self):
        X, y = _separable_dataset()
        space = {"lam": LogUniform(1e-3, 1.0)}
        a = randomized_search("logreg", space, 4, y, X, k=5, seed=11)
        b = randomized_search("logreg", space, 4, y, X, k=5, seed=11)
        assert a.best_params == b.best_params
        assert [r["params"] for r in a.table] == [r["params"] for r in b.table]
        assert [r["mean_f1"] for r in a.table] == [r["mean_f1"] for r in b.table]

    def test_empty_space_error(self):
        X, y = _separable_dataset()
        with pytest.raises(ValueError):
            randomized_search("logreg", {}, 2, y, X)

    def test_bad_n_iter(self):
        X, y = _separable_dataset()
        with pytest.raises(ValueError):
            randomized_search("logreg", {"lam": Choice((0.1,))}, 0, y, X)

    def test_distribution_validation(self):
        with pytest.raises(ValueError):
            LogUniform(0.0, 1.0)
        with pytest.raises(ValueError):
            Choice(())
