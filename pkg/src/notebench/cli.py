"""Command-line interface: every pipeline stage as a subcommand.

Exit codes: 0 success, 1 usage error, 2 data/validation error. Diagnostics
go to stderr; data goes to files (--out) or stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, evaluation, featurize, models, preprocess
from .corpus import Corpus, CorpusFormatError, SynthConfig, generate_synthetic, load_corpus, save_corpus
from .featurize import EmbeddingFormatError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    data errors, so parser errors are rethrown and mapped to exit 1."""

    def error(self, message: str):
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="notebench", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("synth", parents=[], help="generate a synthetic labeled corpus")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--prevalence", type=float, default=0.18)
    p.add_argument("--signal", type=float, default=0.85)
    p.add_argument("--noise", type=float, default=0.03)
    p.add_argument("--min-len", type=int, default=30)
    p.add_argument("--max-len", type=int, default=120)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)

    p = sub.add_parser("preprocess", help="apply the cleaning chain to a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--abbrev")
    p.add_argument("--mask-terms")
    p.add_argument("--no-mask", action="store_true")

    p = sub.add_parser("split", help="stratified 64/16/20 split of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)

    p = sub.add_parser("featurize", help="fit TF-IDF on a corpus, or validate an embeddings file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", help="validate this embeddings file against the corpus")
    p.add_argument("--splits", help="fit on the train partition of this split file")
    p.add_argument("--max-features", type=int, default=featurize.MAX_FEATURES_DEFAULT)
    p.add_argument("--no-lemma", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("train", help="train a classifier on featurized notes")
    p.add_argument("--corpus", required=True, help="preprocessed corpus (JSONL)")
    p.add_argument("--tfidf", help="fitted TF-IDF model (JSON)")
    p.add_argument("--embeddings", help="embeddings file (JSONL)")
    p.add_argument("--classifier", required=True, choices=["logreg", "gbdt"])
    p.add_argument("--splits", help="train on the train partition of this split file")
    p.add_argument("--class-weights", default="balanced", help='"balanced", "none", or "w0,w1"')
    p.add_argument("--params", help="JSON file of hyperparameters")
    p.add_argument("--no-lemma", action="store_true")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)

    p = sub.add_parser("tune", help="randomized hyperparameter search (5-fold stratified CV)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tfidf", help="fitted TF-IDF model (JSON)")
    p.add_argument("--embeddings")
    p.add_argument("--classifier", required=True, choices=["logreg", "gbdt"])
    p.add_argument("--splits")
    p.add_argument("--class-weights", default="balanced")
    p.add_argument("--n-iter", type=int, default=10)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--no-lemma", action="store_true")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="evaluate a trained model on the test partition")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tfidf")
    p.add_argument("--embeddings")
    p.add_argument("--model", required=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--threshold", default="auto", help='"auto" (F1-max on validation) or a float')
    p.add_argument("--no-lemma", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("bench", help="run the full benchmark grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default="bench_out")

    return parser


def _load_splits(path: str, corpus: Corpus) -> dict[str, np.ndarray]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    pos = {note_id: i for i, note_id in enumerate(corpus.ids())}
    out = {}
    for part in ("train", "valid", "test"):
        try:
            out[part] = np.array([pos[i] for i in doc[part]], dtype=np.int64)
        except KeyError as exc:
            raise CorpusFormatError(f"{path}: split references unknown note_id or part: {exc}")
    return out


def _feature_matrix(args, corpus: Corpus) -> featurize.FeatureMatrix:
    if args.tfidf and args.embeddings:
        raise _UsageError("give either --tfidf or --embeddings, not both")
    if args.tfidf:
        model = featurize.TfidfModel.load(args.tfidf)
        tokens = [featurize.tokenize(t, lemmatize=not args.no_lemma) for t in corpus.texts()]
        vecs = [featurize.tfidf_transform(model, t) for t in tokens]
        return featurize.FeatureMatrix.from_sparse_vectors(vecs, dim=model.n_features)
    if args.embeddings:
        emb = featurize.load_embeddings(args.embeddings)
        return featurize.FeatureMatrix.from_dense(emb.pooled_matrix(corpus.ids()))
    raise _UsageError("one of --tfidf or --embeddings is required")


def _class_weights(arg: str, y: np.ndarray):
    if arg == "balanced":
        return models.compute_class_weights(y)
    if arg in ("none", "None", ""):
        return None
    parts = arg.split(",")
    if len(parts) != 2:
        raise _UsageError('--class-weights must be "balanced", "none", or "w0,w1"')
    return models.ClassWeights(w0=float(parts[0]), w1=float(parts[1]))


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n=args.n,
        prevalence=args.prevalence,
        signal_strength=args.signal,
        noise_rate=args.noise,
        length_range=(args.min_len, args.max_len),
        seed=args.seed,
    )
    corpus = generate_synthetic(cfg)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} notes ({sum(n.label for n in corpus)} positive) to {args.out}", file=sys.stderr)
    return 0


def cmd_preprocess(args) -> int:
    corpus = load_corpus(args.corpus)
    cfg = preprocess.PreprocessConfig(
        abbrev_map=preprocess.load_abbreviations(args.abbrev),
        mask_list=preprocess.load_mask_terms(args.mask_terms),
        apply_mask=not args.no_mask,
    )
    cleaned = Corpus(
        notes=tuple(
            type(n)(note_id=n.note_id, text=preprocess.preprocess_note(n.text, cfg), label=n.label)
            for n in corpus
        )
    )
    save_corpus(cleaned, args.out)
    return 0


def cmd_split(args) -> int:
    corpus = load_corpus(args.corpus)
    train, valid, test = evaluation.stratified_split(corpus.labels(), evaluation.SplitSpec(seed=args.seed))
    ids = corpus.ids()
    doc = {
        "seed": args.seed,
        "train": [ids[i] for i in train],
        "valid": [ids[i] for i in valid],
        "test": [ids[i] for i in test],
    }
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_featurize(args) -> int:
    corpus = load_corpus(args.corpus)
    if args.embeddings:
        emb = featurize.load_embeddings(args.embeddings)
        emb.require_ids(corpus.ids())
        print(
            f"embeddings ok: dim={emb.dim} encoder={emb.encoder} notes={len(emb.vectors)}",
            file=sys.stderr,
        )
        return 0
    rows = range(len(corpus))
    if args.splits:
        rows = _load_splits(args.splits, corpus)["train"]
    tokens = [
        featurize.tokenize(corpus.notes[i].text, lemmatize=not args.no_lemma) for i in rows
    ]
    model = featurize.fit_tfidf(tokens, max_features=args.max_features)
    if not args.out:
        raise _UsageError("--out is required when fitting TF-IDF")
    model.save(args.out)
    print(f"fitted TF-IDF vocabulary of {model.n_features} terms", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    X = _feature_matrix(args, corpus)
    y = corpus.labels()
    rows = np.arange(len(corpus))
    if args.splits:
        rows = _load_splits(args.splits, corpus)["train"]
    cw = _class_weights(args.class_weights, y[rows])
    params = json.loads(Path(args.params).read_text(encoding="utf-8")) if args.params else {}
    model = evaluation.train_classifier(args.classifier, X.take(rows), y[rows], cw, params, args.seed)
    models.save_model(model, args.out)
    return 0


def cmd_tune(args) -> int:
    corpus = load_corpus(args.corpus)
    X = _feature_matrix(args, corpus)
    y = corpus.labels()
    rows = np.arange(len(corpus))
    if args.splits:
        rows = _load_splits(args.splits, corpus)["train"]
    cw_arg = args.class_weights if args.class_weights == "balanced" else _class_weights(args.class_weights, y[rows])
    space = evaluation.LOGREG_SEARCH_SPACE if args.classifier == "logreg" else evaluation.GBDT_SEARCH_SPACE
    result = evaluation.randomized_search(
        args.classifier, space, args.n_iter, y[rows], X.take(rows), k=args.k, seed=args.seed, class_weights=cw_arg
    )
    doc = {"best_params": result.best_params, "best_mean_f1": result.best_score, "table": result.table}
    Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    X = _feature_matrix(args, corpus)
    y = corpus.labels()
    splits = _load_splits(args.splits, corpus)
    model = models.load_model(args.model)
    if args.threshold == "auto":
        valid_scores = model.predict_proba(X.take(splits["valid"]))
        threshold = evaluation.optimal_threshold(evaluation.pr_curve(y[splits["valid"]], valid_scores))
    else:
        try:
            threshold = float(args.threshold)
        except ValueError:
            raise _UsageError('--threshold must be "auto" or a float')
    test_scores = model.predict_proba(X.take(splits["test"]))
    report = evaluation.classification_report(
        y[splits["test"]], (test_scores >= threshold).astype(int), test_scores, threshold=threshold
    )
    _write_or_print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True), args.out)
    return 0


def cmd_bench(args) -> int:
    cfg = bench.BenchConfig.from_json_file(args.config)
    result = bench.run_benchmark(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.json").write_text(bench.results_json(result), encoding="utf-8")
    (out_dir / "table.md").write_text(bench.render_table(result), encoding="utf-8")
    print(f"wrote {out_dir / 'results.json'} and {out_dir / 'table.md'}", file=sys.stderr)
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "split": cmd_split,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "tune": cmd_tune,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def cli_dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required")
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (CorpusFormatError, EmbeddingFormatError, FileNotFoundError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
