"""Class-weighted binary classifiers built from scratch on numpy.

Two predictors, both emitting class-1 probabilities:

* L2-regularized logistic regression trained by full-batch gradient
  descent with Armijo backtracking line search. The loss is the
  weight-normalized cross entropy plus (lam/2)*||w||^2 with the bias
  left unregularized, so scaling all sample weights by a constant leaves
  the optimization path unchanged.

* Second-order (Newton) gradient boosting on the logistic loss with
  exact greedy split search. Per round, g_i = s_i*(p_i - y_i) and
  h_i = s_i*p_i*(1 - p_i); split gain is
  0.5*[GL^2/(HL+l2) + GR^2/(HR+l2) - G^2/(H+l2)] - min_gain, leaf values
  are -G/(H+l2), and the model score accumulates as
  base_score + learning_rate * sum of tree outputs. The split search is
  sparsity-aware: implicit entries are true zeros and candidate
  thresholds are enumerated over the distinct observed values, zeros
  included, so results match a dense exact search bit for bit while the
  work stays proportional to the nonzeros in each node.

Everything here is deterministic; gain ties break toward the lowest
feature index, then the lowest threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .featurize import FeatureMatrix, SparseVector, as_feature_matrix

__all__ = [
    "ClassWeights",
    "LogRegModel",
    "GbdtParams",
    "TreeNode",
    "GbdtModel",
    "compute_class_weights",
    "sample_weight_vector",
    "train_logreg",
    "logreg_loss",
    "logreg_gradient",
    "logreg_predict",
    "train_gbdt",
    "gbdt_predict",
    "save_model",
    "load_model",
]

PROB_EPS = 1e-12


@dataclass(frozen=True)
class ClassWeights:
    """Per-class loss multipliers: w0 for the majority, w1 for the minority."""

    w0: float
    w1: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.w0) and math.isfinite(self.w1)):
            raise ValueError("class weights must be finite")
        if self.w0 <= 0 or self.w1 <= 0:
            raise ValueError("class weights must be positive")


def compute_class_weights(labels: np.ndarray) -> ClassWeights:
    """Balanced heuristic w_c = N / (2 * N_c); both classes must be present."""
    labels = np.asarray(labels)
    n = labels.size
    n1 = int(np.sum(labels == 1))
    n0 = n - n1
    if n0 == 0 or n1 == 0:
        raise ValueError("both classes must be present to compute class weights")
    return ClassWeights(w0=n / (2.0 * n0), w1=n / (2.0 * n1))


def sample_weight_vector(labels: np.ndarray, cw: ClassWeights | None) -> np.ndarray:
    labels = np.asarray(labels)
    if cw is None:
        return np.ones(labels.size)
    return np.where(labels == 1, cw.w1, cw.w0).astype(float)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _clip_prob(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def _check_training_inputs(X: FeatureMatrix, y: np.ndarray) -> None:
    if not X.finite():
        raise ValueError("feature matrix contains non-finite values")
    if X.n_rows != y.size:
        raise ValueError(f"X has {X.n_rows} rows but y has {y.size} labels")
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError("training labels contain a single class")
    if not np.all(np.isin(classes, (0, 1))):
        raise ValueError("labels must be 0/1")


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    lam: float
    n_iter: int = 0
    loss_history: list[float] = field(default_factory=list)

    def decision(self, X: FeatureMatrix) -> np.ndarray:
        return X.matvec(self.weights) + self.bias

    def predict_proba(self, X) -> np.ndarray:
        X = as_feature_matrix(X)
        if X.n_cols != self.weights.size:
            raise ValueError(f"expected {self.weights.size} features, got {X.n_cols}")
        return _clip_prob(_sigmoid(self.decision(X)))


def _logreg_loss(z: np.ndarray, w: np.ndarray, y: np.ndarray, s: np.ndarray, s_total: float, lam: float) -> float:
    p = _clip_prob(_sigmoid(z))
    ce = -np.sum(s * (y * np.log(p) + (1.0 - y) * np.log(1.0 - p))) / s_total
    return float(ce + 0.5 * lam * np.dot(w, w))


def logreg_loss(X, y: np.ndarray, w: np.ndarray, b: float, class_weights: ClassWeights | None, lam: float) -> float:
    """Objective minimized by train_logreg at parameters (w, b)."""
    X = as_feature_matrix(X)
    y = np.asarray(y, dtype=float)
    s = sample_weight_vector(y, class_weights)
    return _logreg_loss(X.matvec(w) + b, w, y, s, float(s.sum()), lam)


def logreg_gradient(
    X, y: np.ndarray, w: np.ndarray, b: float, class_weights: ClassWeights | None, lam: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient (d/dw, d/db) of logreg_loss."""
    X = as_feature_matrix(X)
    y = np.asarray(y, dtype=float)
    s = sample_weight_vector(y, class_weights)
    p = _sigmoid(X.matvec(w) + b)
    r = s * (p - y) / float(s.sum())
    return X.rmatvec(r) + lam * w, float(r.sum())


def train_logreg(
    X,
    y: np.ndarray,
    class_weights: ClassWeights | None = None,
    lam: float = 1e-2,
    max_iter: int = 500,
    tol: float = 1e-6,
    seed: int = 0,
    trace: list | None = None,
) -> LogRegModel:
    """Gradient descent with backtracking line search from w=0, b=0.

    Stops when the gradient infinity-norm drops below tol or after
    max_iter accepted steps. `seed` is accepted for interface uniformity;
    the optimization is deterministic and never consumes randomness. When
    `trace` is a list, (weights, bias) snapshots of every accepted step
    are appended, which is how the tests pin optimization-path identities.
    """
    X = as_feature_matrix(X)
    y = np.asarray(y, dtype=float)
    _check_training_inputs(X, y)
    s = sample_weight_vector(y, class_weights)
    s_total = float(s.sum())

    w = np.zeros(X.n_cols)
    b = 0.0
    z = np.zeros(X.n_rows)
    history: list[float] = [_logreg_loss(z, w, y, s, s_total, lam)]
    n_accepted = 0

    for _ in range(max_iter):
        p = _sigmoid(z)
        r = s * (p - y) / s_total
        gw = X.rmatvec(r) + lam * w
        gb = float(r.sum())
        g_inf = max(float(np.max(np.abs(gw))) if gw.size else 0.0, abs(gb))
        if g_inf < tol:
            break
        loss0 = history[-1]
        g_sq = float(np.dot(gw, gw)) + gb * gb
        step = 1.0
        accepted = False
        for _ in range(60):
            w_new = w - step * gw
            b_new = b - step * gb
            z_new = X.matvec(w_new) + b_new
            loss_new = _logreg_loss(z_new, w_new, y, s, s_total, lam)
            if loss_new <= loss0 - 1e-4 * step * g_sq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        w, b, z = w_new, b_new, z_new
        history.append(loss_new)
        n_accepted += 1
        if trace is not None:
            trace.append((w.copy(), b))

    return LogRegModel(weights=w, bias=b, lam=lam, n_iter=n_accepted, loss_history=history)


def logreg_predict(model: LogRegModel, x) -> float:
    """Class-1 probability sigma(w.x + b) for a single example."""
    if isinstance(x, SparseVector):
        if x.dim != model.weights.size:
            raise ValueError(f"expected dimension {model.weights.size}, got {x.dim}")
        z = float(np.dot(x.values, model.weights[x.indices])) + model.bias
    else:
        x = np.asarray(x, dtype=float)
        if x.shape != (model.weights.size,):
            raise ValueError(f"expected dimension {model.weights.size}, got {x.shape}")
        z = float(np.dot(model.weights, x)) + model.bias
    return float(_clip_prob(_sigmoid(np.array([z])))[0])


# ---------------------------------------------------------------------------
# Gradient-boosted trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GbdtParams:
    n_trees: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_child_hessian: float = 0.0
    l2: float = 1.0
    min_gain: float = 0.0

    def __post_init__(self) -> None:
        if self.n_trees < 0 or self.max_depth < 1:
            raise ValueError("n_trees must be >= 0 and max_depth >= 1")
        # learning_rate 0 is legal: the ensemble then predicts the base rate
        if self.learning_rate < 0 or self.l2 < 0 or self.min_child_hessian < 0:
            raise ValueError("invalid gbdt hyperparameters")


@dataclass
class TreeNode:
    """Internal node (feature, threshold, children) or leaf (value)."""

    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.value}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TreeNode":
        if "leaf" in doc:
            return cls(value=float(doc["leaf"]))
        return cls(
            feature=int(doc["feature"]),
            threshold=float(doc["threshold"]),
            left=cls.from_dict(doc["left"]),
            right=cls.from_dict(doc["right"]),
        )


@dataclass
class GbdtModel:
    base_score: float
    params: GbdtParams
    trees: list[TreeNode] = field(default_factory=list)
    n_features: int = 0

    def raw_scores(self, X: FeatureMatrix) -> np.ndarray:
        scores = np.full(X.n_rows, self.base_score)
        rows = np.arange(X.n_rows, dtype=np.int64)
        for tree in self.trees:
            out = np.empty(X.n_rows)
            _apply_tree(tree, _ColumnAccess(X), rows, out)
            scores += self.params.learning_rate * out
        return scores

    def predict_proba(self, X) -> np.ndarray:
        X = as_feature_matrix(X)
        if self.n_features and X.n_cols != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.n_cols}")
        return _clip_prob(_sigmoid(self.raw_scores(X)))


class _ColumnAccess:
    """Dense column extraction from CSR, cached per feature."""

    def __init__(self, X: FeatureMatrix):
        self._X = X
        self._rows_of_entry = np.repeat(np.arange(X.n_rows, dtype=np.int64), np.diff(X.indptr))
        order = np.argsort(X.indices, kind="stable")
        self._col_sorted = X.indices[order]
        self._row_sorted = self._rows_of_entry[order]
        self._val_sorted = X.data[order]
        self._cache: dict[int, np.ndarray] = {}

    def column(self, j: int) -> np.ndarray:
        col = self._cache.get(j)
        if col is None:
            lo = int(np.searchsorted(self._col_sorted, j, side="left"))
            hi = int(np.searchsorted(self._col_sorted, j, side="right"))
            col = np.zeros(self._X.n_rows)
            col[self._row_sorted[lo:hi]] = self._val_sorted[lo:hi]
            self._cache[j] = col
        return col


def _apply_tree(node: TreeNode, cols: _ColumnAccess, rows: np.ndarray, out: np.ndarray) -> None:
    if node.is_leaf:
        out[rows] = node.value
        return
    vals = cols.column(node.feature)[rows]
    go_left = vals < node.threshold
    _apply_tree(node.left, cols, rows[go_left], out)
    _apply_tree(node.right, cols, rows[~go_left], out)


class _SplitSearch:
    """Exact greedy split search over entries sorted by (feature, value).

    For each node, entries belonging to member rows are compressed out of
    the globally sorted arrays; candidate thresholds are midpoints between
    consecutive distinct values, with the node's implicit zeros treated as
    a block of real 0.0 values sitting between the negative and positive
    entries of each feature.
    """

    def __init__(self, X: FeatureMatrix):
        rows_of_entry = np.repeat(np.arange(X.n_rows, dtype=np.int64), np.diff(X.indptr))
        order = np.lexsort((rows_of_entry, X.data, X.indices))
        self.ent_row = rows_of_entry[order]
        self.ent_feat = X.indices[order]
        self.ent_val = X.data[order]
        self.n_rows = X.n_rows

    def best(
        self,
        member_mask: np.ndarray,
        g: np.ndarray,
        h: np.ndarray,
        g_total: float,
        h_total: float,
        m: int,
        l2: float,
        min_gain: float,
        min_child_hessian: float,
    ) -> tuple[int, float] | None:
        keep = member_mask[self.ent_row]
        f = self.ent_feat[keep]
        v = self.ent_val[keep]
        r = self.ent_row[keep]
        if f.size == 0:
            return None
        ge = g[r]
        he = h[r]

        new_seg = np.empty(f.size, dtype=bool)
        new_seg[0] = True
        new_seg[1:] = f[1:] != f[:-1]
        seg_start = np.flatnonzero(new_seg)
        seg_end = np.append(seg_start[1:], f.size)
        seg_len = seg_end - seg_start
        seg_feat = f[seg_start]
        seg_id = np.cumsum(new_seg) - 1

        cg = np.cumsum(ge)
        chs = np.cumsum(he)
        cg0 = np.concatenate(([0.0], cg))
        ch0 = np.concatenate(([0.0], chs))
        gl_nz = cg - cg0[seg_start][seg_id]
        hl_nz = chs - ch0[seg_start][seg_id]

        seg_sum_g = cg[seg_end - 1] - cg0[seg_start]
        seg_sum_h = chs[seg_end - 1] - ch0[seg_start]
        g_zero = g_total - seg_sum_g
        h_zero = h_total - seg_sum_h
        cnt_zero = m - seg_len

        cn = np.cumsum(v < 0)
        cn0 = np.concatenate(([0], cn))
        neg_count = cn[seg_end - 1] - cn0[seg_start]
        pos_count = seg_len - neg_count

        cand_feat: list[np.ndarray] = []
        cand_thr: list[np.ndarray] = []
        cand_gl: list[np.ndarray] = []
        cand_hl: list[np.ndarray] = []

        # (A) boundaries between consecutive member entries of one feature
        same_seg = np.zeros(f.size, dtype=bool)
        same_seg[:-1] = ~new_seg[1:] if f.size > 1 else False
        k = np.flatnonzero(same_seg[:-1] & (v[:-1] < v[1:])) if f.size > 1 else np.empty(0, dtype=np.int64)
        if k.size:
            seg_k = seg_id[k]
            has_zero = cnt_zero[seg_k] > 0
            spans_zero = (v[k] < 0) & (v[k + 1] > 0) & has_zero
            k = k[~spans_zero]
            if k.size:
                seg_k = seg_id[k]
                zeros_left = (cnt_zero[seg_k] > 0) & (v[k] > 0)
                cand_feat.append(f[k])
                cand_thr.append((v[k] + v[k + 1]) / 2.0)
                cand_gl.append(gl_nz[k] + np.where(zeros_left, g_zero[seg_k], 0.0))
                cand_hl.append(hl_nz[k] + np.where(zeros_left, h_zero[seg_k], 0.0))

        # (B) last negative entry | zero block
        sel = np.flatnonzero((cnt_zero > 0) & (neg_count > 0))
        if sel.size:
            kb = seg_start[sel] + neg_count[sel] - 1
            cand_feat.append(seg_feat[sel])
            cand_thr.append(v[kb] / 2.0)
            cand_gl.append(gl_nz[kb])
            cand_hl.append(hl_nz[kb])

        # (C) zero block | first positive entry
        sel = np.flatnonzero((cnt_zero > 0) & (pos_count > 0))
        if sel.size:
            kc = seg_start[sel] + neg_count[sel]
            gl_neg = np.where(neg_count[sel] > 0, gl_nz[np.maximum(kc - 1, 0)], 0.0)
            hl_neg = np.where(neg_count[sel] > 0, hl_nz[np.maximum(kc - 1, 0)], 0.0)
            cand_feat.append(seg_feat[sel])
            cand_thr.append(v[kc] / 2.0)
            cand_gl.append(gl_neg + g_zero[sel])
            cand_hl.append(hl_neg + h_zero[sel])

        if not cand_feat:
            return None
        feat = np.concatenate(cand_feat)
        thr = np.concatenate(cand_thr)
        gl = np.concatenate(cand_gl)
        hl = np.concatenate(cand_hl)
        gr = g_total - gl
        hr = h_total - hl

        parent = g_total * g_total / (h_total + l2)
        gain = 0.5 * (gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent) - min_gain
        valid = (gain > 0) & (hl >= min_child_hessian) & (hr >= min_child_hessian)
        if not np.any(valid):
            return None
        best_gain = gain[valid].max()
        tied = np.flatnonzero(valid & (gain == best_gain))
        best = min(tied, key=lambda i: (feat[i], thr[i]))
        return int(feat[best]), float(thr[best])


def train_gbdt(
    X,
    y: np.ndarray,
    sample_weights: np.ndarray | None = None,
    params: GbdtParams | None = None,
    seed: int = 0,
) -> GbdtModel:
    """Newton boosting on the logistic loss; see the module docstring.

    `sample_weights` multiply both g and h per row (class weighting enters
    here). `seed` is accepted for interface uniformity; training is exact
    and consumes no randomness.
    """
    if params is None:
        params = GbdtParams()
    X = as_feature_matrix(X)
    y = np.asarray(y, dtype=float)
    _check_training_inputs(X, y)
    s = np.ones(y.size) if sample_weights is None else np.asarray(sample_weights, dtype=float)
    if s.size != y.size or np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise ValueError("sample_weights must be positive, finite, and match y")

    p_base = float(np.sum(s * y) / np.sum(s))
    base_score = math.log(p_base / (1.0 - p_base))
    searcher = _SplitSearch(X)
    cols = _ColumnAccess(X)
    scores = np.full(X.n_rows, base_score)
    all_rows = np.arange(X.n_rows, dtype=np.int64)
    trees: list[TreeNode] = []

    for _ in range(params.n_trees):
        p = _sigmoid(scores)
        g = s * (p - y)
        h = s * p * (1.0 - p)
        tree = _grow_tree(searcher, cols, all_rows, g, h, params, X.n_rows)
        out = np.empty(X.n_rows)
        _apply_tree(tree, cols, all_rows, out)
        scores += params.learning_rate * out
        trees.append(tree)

    return GbdtModel(base_score=base_score, params=params, trees=trees, n_features=X.n_cols)


def _grow_tree(
    searcher: _SplitSearch,
    cols: _ColumnAccess,
    rows: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    params: GbdtParams,
    n_rows: int,
) -> TreeNode:
    """Grow one tree level-wise: every node at the frontier either takes
    its best positive-gain split or becomes a leaf."""
    root = TreeNode()
    frontier: list[tuple[TreeNode, np.ndarray, int]] = [(root, rows, 0)]
    while frontier:
        next_frontier: list[tuple[TreeNode, np.ndarray, int]] = []
        for node, node_rows, depth in frontier:
            g_total = float(g[node_rows].sum())
            h_total = float(h[node_rows].sum())
            split = None
            if depth < params.max_depth and node_rows.size > 1:
                member_mask = np.zeros(n_rows, dtype=bool)
                member_mask[node_rows] = True
                split = searcher.best(
                    member_mask,
                    g,
                    h,
                    g_total,
                    h_total,
                    node_rows.size,
                    params.l2,
                    params.min_gain,
                    params.min_child_hessian,
                )
            if split is None:
                node.value = -g_total / (h_total + params.l2)
                continue
            feature, threshold = split
            vals = cols.column(feature)[node_rows]
            go_left = vals < threshold
            node.feature = feature
            node.threshold = threshold
            node.left = TreeNode()
            node.right = TreeNode()
            next_frontier.append((node.left, node_rows[go_left], depth + 1))
            next_frontier.append((node.right, node_rows[~go_left], depth + 1))
        frontier = next_frontier
    return root


def gbdt_predict(model: GbdtModel, x) -> float:
    """Class-1 probability for a single example."""
    if isinstance(x, SparseVector):
        lookup = x.value_at
    else:
        dense = np.asarray(x, dtype=float)
        lookup = lambda j: float(dense[j])
    score = model.base_score
    for tree in model.trees:
        node = tree
        while not node.is_leaf:
            node = node.left if lookup(node.feature) < node.threshold else node.right
        score += model.params.learning_rate * node.value
    p = _sigmoid(np.array([score]))[0]
    return float(min(max(p, PROB_EPS), 1.0 - PROB_EPS))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_model(model: LogRegModel | GbdtModel, path: str | Path) -> None:
    """Serialize either model kind to a single JSON document."""
    if isinstance(model, LogRegModel):
        doc = {
            "kind": "logreg",
            "weights": [float(w) for w in model.weights],
            "bias": model.bias,
            "lambda": model.lam,
        }
    elif isinstance(model, GbdtModel):
        doc = {
            "kind": "gbdt",
            "base_score": model.base_score,
            "n_features": model.n_features,
            "hyperparams": asdict(model.params),
            "trees": [t.to_dict() for t in model.trees],
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> LogRegModel | GbdtModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = doc.get("kind")
    if kind == "logreg":
        return LogRegModel(
            weights=np.asarray(doc["weights"], dtype=float),
            bias=float(doc["bias"]),
            lam=float(doc["lambda"]),
        )
    if kind == "gbdt":
        return GbdtModel(
            base_score=float(doc["base_score"]),
            params=GbdtParams(**doc["hyperparams"]),
            trees=[TreeNode.from_dict(t) for t in doc["trees"]],
            n_features=int(doc.get("n_features", 0)),
        )
    raise ValueError(f"unknown model kind {kind!r}")
