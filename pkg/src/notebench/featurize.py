"""Text featurization: tokens, TF-IDF sparse vectors, pooled embeddings.

TF-IDF here is fully specified so every number is hand-checkable:
terms are unigrams and bigrams of (optionally lemmatized) tokens, the
vocabulary keeps the top `max_features` terms by total corpus occurrence
count (ties broken lexicographically), idf(t) = ln((1+N)/(1+df_t)) + 1,
and document vectors are raw-count * idf rows normalized to unit L2.

Lemmatization is a shipped exception dictionary plus a small fixed
suffix-rule table, not a parser; the rules are documented on Lemmatizer.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "Lemmatizer",
    "tokenize",
    "TfidfModel",
    "SparseVector",
    "FeatureMatrix",
    "EmbeddingSet",
    "EmbeddingFormatError",
    "fit_tfidf",
    "tfidf_transform",
    "load_embeddings",
    "save_embeddings",
    "random_embeddings",
    "mean_pool",
]

MAX_FEATURES_DEFAULT = 5000
NGRAM_RANGE = (1, 2)


class EmbeddingFormatError(ValueError):
    """Raised when an embeddings file violates the embeddings contract."""


class Lemmatizer:
    """Dictionary + suffix-rule lemma lookup.

    Rule table, applied to lowercase alphabetic tokens after the exception
    dictionary misses; the first matching rule wins and rules do not
    cascade:

      1. -ies -> -y            when len >= 5          (studies -> study)
      2. -es  -> drop "es"     when the word ends in sses/xes/zes/ches/shes
      3. -s   -> drop "s"      when len >= 4 and not ss/us/is ending
      4. -ing -> drop "ing"    when len >= 6, then repair the stem
      5. -ed  -> drop "ed"     when len >= 6, then repair the stem

    Stem repair after 4/5: a doubled final consonant other than l/s loses
    one letter (running -> run); a stem ending in "at", "bl", or "iz" gains
    an "e" (ambulating -> ambulate). Stems shorter than 3 characters abort
    the rule.
    """

    def __init__(self, exceptions: dict[str, str] | None = None) -> None:
        if exceptions is None:
            raw = resources.files("notebench.data").joinpath("lemma_exceptions.json")
            exceptions = json.loads(raw.read_text(encoding="utf-8"))
        self.exceptions = dict(exceptions)

    @staticmethod
    def _repair(stem: str) -> str:
        if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1].isalpha() and stem[-1] not in "ls":
            return stem[:-1]
        if stem.endswith(("at", "bl", "iz")):
            return stem + "e"
        return stem

    def lemma(self, token: str) -> str:
        word = token
        if word in self.exceptions:
            return self.exceptions[word]
        n = len(word)
        if n >= 5 and word.endswith("ies"):
            return word[:-3] + "y"
        if word.endswith(("sses", "xes", "zes", "ches", "shes")):
            return word[:-2]
        if n >= 4 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
            return word[:-1]
        if n >= 6 and word.endswith("ing"):
            stem = self._repair(word[:-3])
            return stem if len(stem) >= 3 else word
        if n >= 6 and word.endswith("ed"):
            stem = self._repair(word[:-2])
            return stem if len(stem) >= 3 else word
        return word


_DEFAULT_LEMMATIZER: Lemmatizer | None = None


def _default_lemmatizer() -> Lemmatizer:
    global _DEFAULT_LEMMATIZER
    if _DEFAULT_LEMMATIZER is None:
        _DEFAULT_LEMMATIZER = Lemmatizer()
    return _DEFAULT_LEMMATIZER


def tokenize(text: str, lemmatize: bool = False, lemmatizer: Lemmatizer | None = None) -> list[str]:
    """Split cleaned text on whitespace; optionally map tokens to lemmas."""
    tokens = text.split()
    if not lemmatize:
        return tokens
    lem = lemmatizer or _default_lemmatizer()
    return [lem.lemma(t) for t in tokens]


def _terms(tokens: list[str]) -> list[str]:
    """Unigrams plus bigrams (bigram tokens joined by one space)."""
    out = list(tokens)
    for i in range(len(tokens) - 1):
        out.append(tokens[i] + " " + tokens[i + 1])
    return out


@dataclass(frozen=True)
class TfidfModel:
    """Fitted vocabulary (term -> column) with idf weights aligned by column."""

    vocabulary: dict[str, int]
    idf: np.ndarray
    max_features: int = MAX_FEATURES_DEFAULT
    ngram_range: tuple[int, int] = NGRAM_RANGE

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)

    def save(self, path: str | Path) -> None:
        idf_by_term = {term: float(self.idf[idx]) for term, idx in self.vocabulary.items()}
        doc = {
            "vocabulary": self.vocabulary,
            "idf": idf_by_term,
            "config": {"max_features": self.max_features, "ngram_range": list(self.ngram_range)},
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfidfModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        vocab = {str(t): int(i) for t, i in doc["vocabulary"].items()}
        idf = np.zeros(len(vocab))
        for term, idx in vocab.items():
            idf[idx] = float(doc["idf"][term])
        cfg = doc.get("config", {})
        return cls(
            vocabulary=vocab,
            idf=idf,
            max_features=int(cfg.get("max_features", MAX_FEATURES_DEFAULT)),
            ngram_range=tuple(cfg.get("ngram_range", NGRAM_RANGE)),
        )


def fit_tfidf(docs: list[list[str]], max_features: int = MAX_FEATURES_DEFAULT) -> TfidfModel:
    """Fit vocabulary and idf over tokenized documents.

    Candidate terms are all unigrams and bigrams. The top max_features by
    total occurrence count are kept (ties -> lexicographically smaller
    term); column indices follow sorted term order so the fit is invariant
    to document order. idf(t) = ln((1+N)/(1+df_t)) + 1.
    """
    if not docs:
        raise ValueError("fit_tfidf requires at least one document")
    term_counts: Counter[str] = Counter()
    doc_freq: Counter[str] = Counter()
    for tokens in docs:
        terms = _terms(tokens)
        term_counts.update(terms)
        doc_freq.update(set(terms))
    if not term_counts:
        raise ValueError("no terms: every document is empty")

    kept = sorted(term_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:max_features]
    vocabulary = {term: idx for idx, term in enumerate(sorted(term for term, _ in kept))}
    n_docs = len(docs)
    idf = np.zeros(len(vocabulary))
    for term, idx in vocabulary.items():
        idf[idx] = math.log((1 + n_docs) / (1 + doc_freq[term])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, max_features=max_features)


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, weight) pairs over a fixed dimensionality."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        if self.indices.size != self.values.size:
            raise ValueError("indices and values must align")
        if self.indices.size and not np.all(np.diff(self.indices) > 0):
            raise ValueError("indices must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("weights must be finite")

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def value_at(self, index: int) -> float:
        k = int(np.searchsorted(self.indices, index))
        if k < self.indices.size and self.indices[k] == index:
            return float(self.values[k])
        return 0.0


def tfidf_transform(model: TfidfModel, tokens: list[str]) -> SparseVector:
    """Raw count * idf, L2-normalized; out-of-vocabulary terms are ignored.

    A document with no in-vocabulary terms maps to the zero vector.
    """
    counts: Counter[str] = Counter(_terms(tokens))
    pairs = sorted(
        (model.vocabulary[t], c) for t, c in counts.items() if t in model.vocabulary
    )
    if not pairs:
        return SparseVector(
            indices=np.empty(0, dtype=np.int64), values=np.empty(0), dim=model.n_features
        )
    indices = np.array([i for i, _ in pairs], dtype=np.int64)
    weights = np.array([c for _, c in pairs], dtype=float) * model.idf[indices]
    norm = np.sqrt(np.dot(weights, weights))
    if norm > 0:
        weights = weights / norm
    return SparseVector(indices=indices, values=weights, dim=model.n_features)


class FeatureMatrix:
    """Row-major sparse matrix (CSR arrays) shared by both classifiers.

    Implicit entries are exactly 0.0; explicit zeros are dropped at
    construction so the representation is canonical.
    """

    def __init__(self, n_rows: int, n_cols: int, indptr: np.ndarray, indices: np.ndarray, data: np.ndarray):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.indptr = indptr.astype(np.int64)
        self.indices = indices.astype(np.int64)
        self.data = data.astype(float)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @classmethod
    def from_sparse_vectors(cls, vectors: list[SparseVector], dim: int | None = None) -> "FeatureMatrix":
        if dim is None:
            if not vectors:
                raise ValueError("dim required for an empty vector list")
            dim = vectors[0].dim
        indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
        chunks_i: list[np.ndarray] = []
        chunks_v: list[np.ndarray] = []
        for r, vec in enumerate(vectors):
            if vec.dim != dim:
                raise ValueError(f"row {r}: dimension {vec.dim} != {dim}")
            keep = vec.values != 0.0
            chunks_i.append(vec.indices[keep])
            chunks_v.append(vec.values[keep])
            indptr[r + 1] = indptr[r] + int(keep.sum())
        indices = np.concatenate(chunks_i) if chunks_i else np.empty(0, dtype=np.int64)
        data = np.concatenate(chunks_v) if chunks_v else np.empty(0)
        return cls(len(vectors), dim, indptr, indices, data)

    @classmethod
    def from_dense(cls, arr: np.ndarray) -> "FeatureMatrix":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        mask = arr != 0.0
        indptr = np.concatenate(([0], np.cumsum(mask.sum(axis=1)))).astype(np.int64)
        rows, cols = np.nonzero(mask)
        return cls(arr.shape[0], arr.shape[1], indptr, cols.astype(np.int64), arr[rows, cols])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    def row(self, r: int) -> SparseVector:
        lo, hi = self.indptr[r], self.indptr[r + 1]
        return SparseVector(indices=self.indices[lo:hi].copy(), values=self.data[lo:hi].copy(), dim=self.n_cols)

    def take(self, rows: np.ndarray) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        counts = self.indptr[rows + 1] - self.indptr[rows]
        indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        chunks = [slice(self.indptr[r], self.indptr[r + 1]) for r in rows]
        indices = (
            np.concatenate([self.indices[s] for s in chunks]) if rows.size else np.empty(0, dtype=np.int64)
        )
        data = np.concatenate([self.data[s] for s in chunks]) if rows.size else np.empty(0)
        return FeatureMatrix(rows.size, self.n_cols, indptr, indices, data)

    def matvec(self, w: np.ndarray) -> np.ndarray:
        """X @ w without densifying; safe for rows with no entries."""
        prod = self.data * w[self.indices]
        cs = np.concatenate(([0.0], np.cumsum(prod)))
        return cs[self.indptr[1:]] - cs[self.indptr[:-1]]

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        """X.T @ v via bincount over column ids."""
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.indptr))
        return np.bincount(self.indices, weights=self.data * v[rows], minlength=self.n_cols)

    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))


def as_feature_matrix(X) -> FeatureMatrix:
    """Accept FeatureMatrix, list of SparseVector, or dense array."""
    if isinstance(X, FeatureMatrix):
        return X
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], SparseVector):
        return FeatureMatrix.from_sparse_vectors(list(X))
    return FeatureMatrix.from_dense(np.asarray(X, dtype=float))


def mean_pool(vectors: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Componentwise arithmetic mean of equal-length vectors."""
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.size == 0 or arr.shape[0] == 0:
        raise ValueError("mean_pool requires at least one vector")
    return arr.mean(axis=0)


@dataclass(frozen=True)
class EmbeddingSet:
    """Per-note sentence vectors keyed by note_id, all of dimension dim."""

    dim: int
    encoder: str
    vectors: dict[str, np.ndarray]

    def require_ids(self, ids: list[str]) -> None:
        missing = [i for i in ids if i not in self.vectors]
        if missing:
            raise EmbeddingFormatError(f"embeddings missing note_id(s): {missing[:5]}")

    def note_vector(self, note_id: str) -> np.ndarray:
        return mean_pool(self.vectors[note_id])

    def pooled_matrix(self, ids: list[str]) -> np.ndarray:
        self.require_ids(ids)
        return np.stack([self.note_vector(i) for i in ids])


def load_embeddings(path: str | Path) -> EmbeddingSet:
    """Read the embeddings JSONL: header {"dim", "encoder"}, then one
    {"note_id", "vectors": [[...], ...]} record per note.

    Raises EmbeddingFormatError naming the offending note_id for dimension
    mismatches and duplicates, and the line number for malformed records.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise EmbeddingFormatError(f"{path}: empty embeddings file")
    try:
        header = json.loads(lines[0])
        dim = int(header["dim"])
        encoder = str(header.get("encoder", "unknown"))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise EmbeddingFormatError(f"{path}:1: invalid header: {exc}") from exc
    if dim <= 0:
        raise EmbeddingFormatError(f"{path}:1: dim must be positive")

    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(line)
            note_id = rec["note_id"]
            vecs = rec["vectors"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise EmbeddingFormatError(f"{path}:{lineno}: malformed record: {exc}") from exc
        if not isinstance(note_id, str) or not note_id:
            raise EmbeddingFormatError(f"{path}:{lineno}: note_id must be a nonempty string")
        if note_id in vectors:
            raise EmbeddingFormatError(f"{path}:{lineno}: duplicate note_id {note_id!r}")
        if not isinstance(vecs, list) or not vecs:
            raise EmbeddingFormatError(f"{path}:{lineno}: note_id {note_id!r} has no vectors")
        arr = []
        for v in vecs:
            if not isinstance(v, list) or len(v) != dim:
                got = len(v) if isinstance(v, list) else type(v).__name__
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: note_id {note_id!r}: vector length {got} != dim {dim}"
                )
            arr.append(np.asarray(v, dtype=float))
        vectors[note_id] = np.stack(arr)
    return EmbeddingSet(dim=dim, encoder=encoder, vectors=vectors)


def save_embeddings(emb: EmbeddingSet, path: str | Path) -> None:
    """Write the embeddings JSONL consumed by load_embeddings."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": emb.dim, "encoder": emb.encoder}) + "\n")
        for note_id, arr in emb.vectors.items():
            rec = {"note_id": note_id, "vectors": [[float(x) for x in row] for row in arr]}
            fh.write(json.dumps(rec) + "\n")


def random_embeddings(ids: list[str], dim: int, seed: int = 0, max_sentences: int = 3) -> EmbeddingSet:
    """Deterministic random-vector embeddings; a stand-in for a real encoder."""
    rng = np.random.default_rng(seed)
    vectors: dict[str, np.ndarray] = {}
    for note_id in ids:
        k = int(rng.integers(1, max_sentences + 1))
        vectors[note_id] = rng.standard_normal((k, dim))
    return EmbeddingSet(dim=dim, encoder="random", vectors=vectors)
