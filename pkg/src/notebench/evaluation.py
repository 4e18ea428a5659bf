"""Stratified splitting, cross-validated randomized search, and metrics.

Splits allocate per-class counts by the largest-remainder method over the
(0.64, 0.16, 0.20) ratios, so realized proportions never deviate from the
targets by a whole sample within a class. The decision threshold is chosen
as the F1-maximizing point of the precision-recall curve, with ties going
to the smallest threshold (the recall-favoring choice). AUC-ROC is the
Mann-Whitney statistic: ties between a positive and a negative score count
one half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models as _models
from .featurize import as_feature_matrix

__all__ = [
    "SplitSpec",
    "PRCurve",
    "EvalReport",
    "LogUniform",
    "Choice",
    "SearchResult",
    "stratified_split",
    "stratified_kfold",
    "randomized_search",
    "train_classifier",
    "pr_curve",
    "optimal_threshold",
    "roc_auc",
    "classification_report",
    "LOGREG_SEARCH_SPACE",
    "GBDT_SEARCH_SPACE",
]

DEFAULT_RATIOS = (0.64, 0.16, 0.20)


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    seed: int = 42

    def __post_init__(self) -> None:
        if len(self.ratios) != 3 or any(r <= 0 for r in self.ratios):
            raise ValueError("ratios must be three positive fractions")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError("ratios must sum to 1")


def _largest_remainder(count: int, ratios: tuple[float, ...]) -> list[int]:
    """Integer allocation of `count` over `ratios`; ties favor earlier parts."""
    exact = [count * r for r in ratios]
    floors = [int(math.floor(e)) for e in exact]
    leftover = count - sum(floors)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in order[:leftover]:
        floors[i] += 1
    return floors


def stratified_split(
    labels: np.ndarray, spec: SplitSpec | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint covering (train, valid, test) index arrays.

    Per-class counts come from largest-remainder allocation over the spec
    ratios (ties resolved train > valid > test); membership within a class
    is a seeded shuffle (numpy PCG64, classes processed in ascending label
    order). Returned index arrays are sorted ascending.
    """
    if spec is None:
        spec = SplitSpec()
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("labels must be nonempty")
    rng = np.random.default_rng(spec.seed)
    parts: list[list[np.ndarray]] = [[], [], []]
    for cls in np.unique(labels):
        cls_idx = np.flatnonzero(labels == cls)
        rng.shuffle(cls_idx)
        counts = _largest_remainder(cls_idx.size, spec.ratios)
        offset = 0
        for part in range(3):
            parts[part].append(cls_idx[offset : offset + counts[part]])
            offset += counts[part]
    return tuple(np.sort(np.concatenate(p)) for p in parts)  # type: ignore[return-value]


def stratified_kfold(labels: np.ndarray, k: int = 5, seed: int = 42) -> list[tuple[np.ndarray, np.ndarray]]:
    """k disjoint test folds covering all indices; per-class sizes differ by <= 1."""
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    fold_members: list[list[np.ndarray]] = [[] for _ in range(k)]
    for cls in np.unique(labels):
        cls_idx = np.flatnonzero(labels == cls)
        if cls_idx.size < k:
            raise ValueError(f"class {cls} has {cls_idx.size} members, fewer than k={k}")
        rng.shuffle(cls_idx)
        for fold, chunk in enumerate(np.array_split(cls_idx, k)):
            fold_members[fold].append(chunk)
    out: list[tuple[np.ndarray, np.ndarray]] = []
    all_idx = np.arange(labels.size)
    for fold in range(k):
        test_idx = np.sort(np.concatenate(fold_members[fold]))
        train_idx = np.setdiff1d(all_idx, test_idx, assume_unique=True)
        out.append((train_idx, test_idx))
    return out


# ---------------------------------------------------------------------------
# Curves and metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PRCurve:
    """One point per distinct score, ordered by threshold ascending."""

    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray

    def __len__(self) -> int:
        return self.thresholds.size


def _check_both_classes(y: np.ndarray) -> None:
    if np.all(y == 1) or np.all(y == 0):
        raise ValueError("both classes must be present")


def pr_curve(y_true: np.ndarray, scores: np.ndarray) -> PRCurve:
    """Precision/recall/F1 at every distinct score, predicting score >= t."""
    y = np.asarray(y_true)
    s = np.asarray(scores, dtype=float)
    if y.size != s.size:
        raise ValueError("y_true and scores must align")
    _check_both_classes(y)
    thresholds = np.unique(s)
    s_sorted = np.sort(s)
    pos_sorted = np.sort(s[y == 1])
    n1 = pos_sorted.size
    predicted_pos = s.size - np.searchsorted(s_sorted, thresholds, side="left")
    tp = n1 - np.searchsorted(pos_sorted, thresholds, side="left")
    precision = np.divide(tp, predicted_pos, out=np.zeros(thresholds.size), where=predicted_pos > 0)
    recall = tp / n1
    pr_sum = precision + recall
    f1 = np.divide(2 * precision * recall, pr_sum, out=np.zeros(thresholds.size), where=pr_sum > 0)
    return PRCurve(thresholds=thresholds, precision=precision, recall=recall, f1=f1)


def optimal_threshold(curve: PRCurve) -> float:
    """Threshold of the max-F1 point; ties pick the smallest threshold."""
    if len(curve) == 0:
        raise ValueError("empty curve")
    return float(curve.thresholds[int(np.argmax(curve.f1))])


def roc_auc(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Mann-Whitney AUC via midranks; tied pairs count one half.

    Midrank arithmetic stays exact in binary floating point, so the result
    equals brute-force pair counting bit for bit.
    """
    y = np.asarray(y_true)
    s = np.asarray(scores, dtype=float)
    if y.size != s.size:
        raise ValueError("y_true and scores must align")
    _check_both_classes(y)
    order = np.argsort(s, kind="mergesort")
    s_sorted = s[order]
    ranks = np.empty(s.size)
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and s_sorted[j + 1] == s_sorted[i]:
            j += 1
        ranks[i : j + 1] = (i + 1 + j + 1) / 2.0
        i = j + 1
    rank_by_index = np.empty(s.size)
    rank_by_index[order] = ranks
    n1 = int(np.sum(y == 1))
    n0 = y.size - n1
    rank_sum_pos = float(np.sum(rank_by_index[y == 1]))
    return (rank_sum_pos - n1 * (n1 + 1) / 2.0) / (n1 * n0)


@dataclass(frozen=True)
class EvalReport:
    """The full per-model metric set, plus its confusion counts."""

    accuracy: float
    precision0: float
    precision1: float
    recall0: float
    recall1: float
    f1_0: float
    f1_1: float
    auc_roc: float
    threshold: float | None
    tp: int
    fp: int
    tn: int
    fn: int

    def to_json_dict(self) -> dict:
        return {
            "Accuracy": self.accuracy,
            "Precision": {"0": self.precision0, "1": self.precision1},
            "Recall": {"0": self.recall0, "1": self.recall1},
            "F1-Score": {"0": self.f1_0, "1": self.f1_1},
            "AUC-ROC": self.auc_roc,
            "Threshold": self.threshold,
            "Confusion": {"TP": self.tp, "FP": self.fp, "TN": self.tn, "FN": self.fn},
        }


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def classification_report(
    y_true: np.ndarray,
    y_pred: np.ndarray,
    scores: np.ndarray,
    threshold: float | None = None,
) -> EvalReport:
    """Accuracy, per-class precision/recall/F1 (0 on empty denominators),
    and AUC-ROC from the raw scores."""
    y = np.asarray(y_true)
    yhat = np.asarray(y_pred)
    s = np.asarray(scores, dtype=float)
    if not (y.size == yhat.size == s.size):
        raise ValueError("y_true, y_pred, and scores must align")
    tp = int(np.sum((y == 1) & (yhat == 1)))
    fp = int(np.sum((y == 0) & (yhat == 1)))
    tn = int(np.sum((y == 0) & (yhat == 0)))
    fn = int(np.sum((y == 1) & (yhat == 0)))
    p1, r1, f1_1 = _prf(tp, fp, fn)
    p0, r0, f1_0 = _prf(tn, fn, fp)
    return EvalReport(
        accuracy=(tp + tn) / y.size,
        precision0=p0,
        precision1=p1,
        recall0=r0,
        recall1=r1,
        f1_0=f1_0,
        f1_1=f1_1,
        auc_roc=roc_auc(y, s),
        threshold=threshold,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
    )


# ---------------------------------------------------------------------------
# Randomized hyperparameter search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogUniform:
    """Continuous log-uniform distribution on [low, high]."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not 0 < self.low <= self.high:
            raise ValueError("LogUniform requires 0 < low <= high")

    def sample(self, rng: np.random.Generator):
        return float(np.exp(rng.uniform(np.log(self.low), np.log(self.high))))


@dataclass(frozen=True)
class Choice:
    """Uniform choice over an explicit value tuple."""

    values: tuple

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("Choice requires at least one value")

    def sample(self, rng: np.random.Generator):
        return self.values[int(rng.integers(0, len(self.values)))]


LOGREG_SEARCH_SPACE: dict = {"lam": LogUniform(1e-4, 10.0)}
GBDT_SEARCH_SPACE: dict = {
    "n_trees": Choice(tuple(range(100, 501))),
    "learning_rate": LogUniform(0.01, 0.3),
    "max_depth": Choice(tuple(range(3, 11))),
    "min_child_hessian": Choice((1.0, 5.0, 10.0)),
    "l2": Choice((0.5, 1.0, 2.0)),
}


@dataclass
class SearchResult:
    best_params: dict
    best_score: float
    table: list[dict] = field(default_factory=list)


def train_classifier(kind: str, X, y, class_weights, params: dict, seed: int):
    """Train either classifier kind from a flat params dict (CV/bench glue)."""
    if kind == "logreg":
        return _models.train_logreg(X, y, class_weights=class_weights, seed=seed, **params)
    if kind == "gbdt":
        sw = _models.sample_weight_vector(y, class_weights)
        return _models.train_gbdt(X, y, sample_weights=sw, params=_models.GbdtParams(**params), seed=seed)
    raise ValueError(f"unknown model kind {kind!r}")


def class1_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    _, _, f1 = _prf(tp, fp, fn)
    return f1


def randomized_search(
    model_kind: str,
    param_space: dict,
    n_iter: int,
    labels: np.ndarray,
    features,
    k: int = 5,
    seed: int = 42,
    class_weights: _models.ClassWeights | str | None = "balanced",
) -> SearchResult:
    """Sample n_iter candidates and score each by mean class-1 F1 over
    k stratified folds at threshold 0.5; ties keep the earlier candidate.

    Candidates are drawn before any evaluation, parameter by parameter in
    the declaration order of param_space, from one PCG64 stream seeded by
    `seed`; the folds use the same seed. Identical seeds therefore mean
    identical candidates, folds, and scores.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if not param_space:
        raise ValueError("param_space must not be empty")
    y = np.asarray(labels)
    X = as_feature_matrix(features)
    rng = np.random.default_rng(seed)
    candidates = [
        {name: dist.sample(rng) for name, dist in param_space.items()} for _ in range(n_iter)
    ]
    folds = stratified_kfold(y, k=k, seed=seed)

    table: list[dict] = []
    scores: list[float] = []
    for params in candidates:
        fold_scores: list[float] = []
        for train_idx, test_idx in folds:
            cw = class_weights
            if cw == "balanced":
                cw = _models.compute_class_weights(y[train_idx])
            model = train_classifier(model_kind, X.take(train_idx), y[train_idx], cw, params, seed)
            proba = model.predict_proba(X.take(test_idx))
            fold_scores.append(class1_f1(y[test_idx], (proba >= 0.5).astype(int)))
        mean_f1 = float(np.mean(fold_scores))
        scores.append(mean_f1)
        table.append({"params": dict(params), "fold_f1": fold_scores, "mean_f1": mean_f1})

    best = int(np.argmax(scores))
    return SearchResult(best_params=dict(candidates[best]), best_score=scores[best], table=table)
