"""notebench: lightweight clinical-note classification toolkit.

Library surface: corpus IO and synthesis, the text cleaning chain, TF-IDF
and pooled-embedding featurization, from-scratch class-weighted
classifiers, stratified evaluation with PR-curve threshold selection, and
a seeded benchmark harness. The `notebench` CLI exposes each stage.
"""

from .corpus import Corpus, CorpusFormatError, Note, SynthConfig, generate_synthetic, load_corpus, save_corpus
from .preprocess import (
    ChunkSpec,
    PreprocessConfig,
    chunk_tokens,
    clean_text,
    empty_guard,
    expand_abbreviations,
    mask_terms,
    normalize_text,
    preprocess_note,
)
from .featurize import (
    EmbeddingFormatError,
    EmbeddingSet,
    FeatureMatrix,
    SparseVector,
    TfidfModel,
    fit_tfidf,
    load_embeddings,
    mean_pool,
    random_embeddings,
    save_embeddings,
    tfidf_transform,
    tokenize,
)
from .models import (
    ClassWeights,
    GbdtModel,
    GbdtParams,
    LogRegModel,
    compute_class_weights,
    gbdt_predict,
    load_model,
    logreg_predict,
    save_model,
    train_gbdt,
    train_logreg,
)
from .evaluation import (
    EvalReport,
    PRCurve,
    SplitSpec,
    classification_report,
    optimal_threshold,
    pr_curve,
    randomized_search,
    roc_auc,
    stratified_kfold,
    stratified_split,
)
from .bench import BenchConfig, BenchResult, ModelSpec, render_table, results_json, run_benchmark

__version__ = "0.1.0"
