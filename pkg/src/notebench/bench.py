"""Experiment grid runner and Table-style report rendering.

One cell = (model spec, seed). Per cell: stratified split seeded by the
cell seed, features fitted on the training partition only, optional
randomized hyperparameter search on the training partition, a decision
threshold chosen on the validation partition, and exactly one evaluation
on the test partition. Aggregates are arithmetic means over seeds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from . import evaluation, featurize, models, preprocess
from .corpus import Corpus, load_corpus
from .evaluation import EvalReport, SplitSpec
from .featurize import FeatureMatrix

__all__ = [
    "ModelSpec",
    "BenchConfig",
    "CellResult",
    "BenchResult",
    "prepare_tokens",
    "run_cell",
    "run_benchmark",
    "render_table",
    "results_json",
    "DEFAULT_SEEDS",
]

DEFAULT_SEEDS = (42, 123, 999)

_METRIC_FIELDS = (
    "accuracy",
    "precision0",
    "precision1",
    "recall0",
    "recall1",
    "f1_0",
    "f1_1",
    "auc_roc",
)


@dataclass(frozen=True)
class ModelSpec:
    """One row of the benchmark grid."""

    name: str
    feature: str = "tfidf"  # "tfidf" | "embedding"
    classifier: str = "logreg"  # "logreg" | "gbdt"
    embeddings: str | None = None
    class_weights: str | tuple[float, float] | None = "balanced"
    params: dict = field(default_factory=dict)
    search: dict | None = None  # {"n_iter": int} -> default space for the classifier

    def __post_init__(self) -> None:
        if self.feature not in ("tfidf", "embedding"):
            raise ValueError(f"unknown feature kind {self.feature!r}")
        if self.classifier not in ("logreg", "gbdt"):
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.feature == "embedding" and not self.embeddings:
            raise ValueError(f"model {self.name!r}: embedding feature requires an embeddings file")

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        cw = doc.get("class_weights", "balanced")
        if isinstance(cw, list):
            cw = (float(cw[0]), float(cw[1]))
        return cls(
            name=doc["name"],
            feature=doc.get("feature", "tfidf"),
            classifier=doc.get("classifier", "logreg"),
            embeddings=doc.get("embeddings"),
            class_weights=cw,
            params=dict(doc.get("params", {})),
            search=doc.get("search"),
        )


@dataclass(frozen=True)
class BenchConfig:
    corpus: str
    models: tuple[ModelSpec, ...]
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    apply_mask: bool = True
    abbrev_path: str | None = None
    mask_path: str | None = None
    lemmatize: bool = True
    max_features: int = featurize.MAX_FEATURES_DEFAULT
    threshold: str | float = "auto"

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if not self.models:
            raise ValueError("at least one model is required")

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchConfig":
        return cls(
            corpus=doc["corpus"],
            models=tuple(ModelSpec.from_dict(m) for m in doc["models"]),
            seeds=tuple(int(s) for s in doc.get("seeds", DEFAULT_SEEDS)),
            apply_mask=bool(doc.get("apply_mask", True)),
            abbrev_path=doc.get("abbrev_path"),
            mask_path=doc.get("mask_path"),
            lemmatize=bool(doc.get("lemmatize", True)),
            max_features=int(doc.get("max_features", featurize.MAX_FEATURES_DEFAULT)),
            threshold=doc.get("threshold", "auto"),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "BenchConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "models": [
                {
                    "name": m.name,
                    "feature": m.feature,
                    "classifier": m.classifier,
                    "embeddings": m.embeddings,
                    "class_weights": list(m.class_weights)
                    if isinstance(m.class_weights, tuple)
                    else m.class_weights,
                    "params": m.params,
                    "search": m.search,
                }
                for m in self.models
            ],
            "seeds": list(self.seeds),
            "apply_mask": self.apply_mask,
            "abbrev_path": self.abbrev_path,
            "mask_path": self.mask_path,
            "lemmatize": self.lemmatize,
            "max_features": self.max_features,
            "threshold": self.threshold,
        }


@dataclass
class CellResult:
    model: str
    seed: int
    report: EvalReport
    threshold: float
    params: dict
    vocabulary: dict[str, int] | None = None


@dataclass
class BenchResult:
    config: BenchConfig
    cells: list[CellResult]

    def cells_for(self, model_name: str) -> list[CellResult]:
        return [c for c in self.cells if c.model == model_name]

    def aggregate(self, model_name: str) -> dict[str, float]:
        """Arithmetic mean over seeds of every metric plus the threshold."""
        cells = self.cells_for(model_name)
        out = {
            name: float(np.mean([getattr(c.report, name) for c in cells]))
            for name in _METRIC_FIELDS
        }
        out["threshold"] = float(np.mean([c.threshold for c in cells]))
        return out


def prepare_tokens(corpus: Corpus, cfg: BenchConfig) -> list[list[str]]:
    """Preprocess and tokenize every note once; no corpus-level fitting."""
    pre_cfg = preprocess.PreprocessConfig(
        abbrev_map=preprocess.load_abbreviations(cfg.abbrev_path),
        mask_list=preprocess.load_mask_terms(cfg.mask_path),
        apply_mask=cfg.apply_mask,
    )
    return [
        featurize.tokenize(preprocess.preprocess_note(text, pre_cfg), lemmatize=cfg.lemmatize)
        for text in corpus.texts()
    ]


def _resolve_class_weights(spec: ModelSpec, y_train: np.ndarray):
    if spec.class_weights == "balanced":
        return models.compute_class_weights(y_train)
    if spec.class_weights is None:
        return None
    w0, w1 = spec.class_weights
    return models.ClassWeights(w0=float(w0), w1=float(w1))


def _default_space(classifier: str) -> dict:
    return (
        evaluation.LOGREG_SEARCH_SPACE if classifier == "logreg" else evaluation.GBDT_SEARCH_SPACE
    )


def run_cell(
    tokens: list[list[str]],
    labels: np.ndarray,
    spec: ModelSpec,
    seed: int,
    cfg: BenchConfig,
    embeddings: featurize.EmbeddingSet | None = None,
    note_ids: list[str] | None = None,
) -> CellResult:
    """Run one (model, seed) cell; see the module docstring for the protocol."""
    train_idx, valid_idx, test_idx = evaluation.stratified_split(labels, SplitSpec(seed=seed))

    vocabulary: dict[str, int] | None = None
    if spec.feature == "tfidf":
        tfidf = featurize.fit_tfidf([tokens[i] for i in train_idx], max_features=cfg.max_features)
        vocabulary = tfidf.vocabulary
        X = FeatureMatrix.from_sparse_vectors(
            [featurize.tfidf_transform(tfidf, t) for t in tokens], dim=tfidf.n_features
        )
    else:
        if embeddings is None or note_ids is None:
            raise ValueError(f"model {spec.name!r} needs an embeddings file")
        X = FeatureMatrix.from_dense(embeddings.pooled_matrix(note_ids))

    y = np.asarray(labels)
    cw = _resolve_class_weights(spec, y[train_idx])

    params = dict(spec.params)
    if spec.search is not None:
        n_iter = int(spec.search.get("n_iter", 10))
        space = spec.search.get("space") or _default_space(spec.classifier)
        found = evaluation.randomized_search(
            spec.classifier,
            space,
            n_iter,
            y[train_idx],
            X.take(train_idx),
            seed=seed,
            class_weights=cw,
        )
        params = {**found.best_params, **params}

    model = evaluation.train_classifier(spec.classifier, X.take(train_idx), y[train_idx], cw, params, seed)

    if cfg.threshold == "auto":
        valid_scores = model.predict_proba(X.take(valid_idx))
        threshold = evaluation.optimal_threshold(evaluation.pr_curve(y[valid_idx], valid_scores))
    else:
        threshold = float(cfg.threshold)

    test_scores = model.predict_proba(X.take(test_idx))
    report = evaluation.classification_report(
        y[test_idx], (test_scores >= threshold).astype(int), test_scores, threshold=threshold
    )
    return CellResult(
        model=spec.name, seed=seed, report=report, threshold=threshold, params=params, vocabulary=vocabulary
    )


def run_benchmark(cfg: BenchConfig) -> BenchResult:
    """Run the full grid (models x seeds) in config order, deterministically."""
    corpus = load_corpus(cfg.corpus)
    tokens = prepare_tokens(corpus, cfg)
    labels = corpus.labels()
    note_ids = corpus.ids()

    emb_cache: dict[str, featurize.EmbeddingSet] = {}
    cells: list[CellResult] = []
    for spec in cfg.models:
        embeddings = None
        if spec.feature == "embedding":
            if spec.embeddings not in emb_cache:
                emb_cache[spec.embeddings] = featurize.load_embeddings(spec.embeddings)
                emb_cache[spec.embeddings].require_ids(note_ids)
            embeddings = emb_cache[spec.embeddings]
        for seed in cfg.seeds:
            cells.append(
                run_cell(tokens, labels, spec, seed, cfg, embeddings=embeddings, note_ids=note_ids)
            )
    return BenchResult(config=cfg, cells=cells)


def _fmt2(value: float) -> str:
    """Two decimals, half-up: 0.805 -> '0.81'."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


TABLE_HEADER = (
    "| Model | Accuracy | Precision (0) | Precision (1) | Recall (0) | Recall (1) "
    "| F1-Score (0) | F1-Score (1) | AUC-ROC |"
)


def render_table(result: BenchResult) -> str:
    """Markdown table of seed-mean metrics, one row per model in config order."""
    lines = [TABLE_HEADER, "|" + "---|" * 9]
    for spec in result.config.models:
        agg = result.aggregate(spec.name)
        cells = [
            spec.name,
            _fmt2(agg["accuracy"]),
            _fmt2(agg["precision0"]),
            _fmt2(agg["precision1"]),
            _fmt2(agg["recall0"]),
            _fmt2(agg["recall1"]),
            _fmt2(agg["f1_0"]),
            _fmt2(agg["f1_1"]),
            _fmt2(agg["auc_roc"]),
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def results_json(result: BenchResult) -> str:
    """Canonical JSON for the whole run; identical configs give identical bytes."""
    doc = {
        "config": result.config.to_dict(),
        "models": [
            {
                "name": spec.name,
                "per_seed": [
                    {
                        "seed": c.seed,
                        "threshold": c.threshold,
                        "params": c.params,
                        "report": c.report.to_json_dict(),
                    }
                    for c in result.cells_for(spec.name)
                ],
                "mean": result.aggregate(spec.name),
            }
            for spec in result.config.models
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
