"""Labeled note corpora: JSONL load/save and a seeded synthetic generator.

The synthetic generator stands in for a private EHR corpus. It plants
label-consistent cue phrases into neutral clinical filler text so that a
text classifier has a real (and tunable) signal to find, while keeping the
whole construction deterministic under a single 64-bit seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "Note",
    "Corpus",
    "SynthConfig",
    "CorpusFormatError",
    "load_corpus",
    "save_corpus",
    "generate_synthetic",
    "filler_vocabulary",
    "positive_cue_phrases",
    "negative_cue_phrases",
]


class CorpusFormatError(ValueError):
    """Raised when a corpus file or record violates the corpus contract."""


@dataclass(frozen=True)
class Note:
    """One labeled clinical note: 0 = non-discharge, 1 = discharge next day."""

    note_id: str
    text: str
    label: int

    def __post_init__(self) -> None:
        if not self.note_id:
            raise CorpusFormatError("note_id must be a nonempty string")
        if self.label not in (0, 1):
            raise CorpusFormatError(
                f"label must be 0 or 1, got {self.label!r} (note_id={self.note_id!r})"
            )


@dataclass(frozen=True)
class Corpus:
    """Ordered collection of notes with unique ids; order is load order."""

    notes: tuple[Note, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for note in self.notes:
            if note.note_id in seen:
                raise CorpusFormatError(f"duplicate note_id {note.note_id!r}")
            seen.add(note.note_id)

    def __len__(self) -> int:
        return len(self.notes)

    def __iter__(self):
        return iter(self.notes)

    @property
    def prevalence(self) -> float:
        """Fraction of label-1 notes; 0.0 for an empty corpus."""
        if not self.notes:
            return 0.0
        return sum(n.label for n in self.notes) / len(self.notes)

    def labels(self) -> np.ndarray:
        return np.array([n.label for n in self.notes], dtype=np.int64)

    def texts(self) -> list[str]:
        return [n.text for n in self.notes]

    def ids(self) -> list[str]:
        return [n.note_id for n in self.notes]


@dataclass(frozen=True)
class SynthConfig:
    """Parameters for the synthetic corpus generator.

    signal_strength is the probability that a note carries 1-3 cue phrases
    from its own label's cue list; noise_rate is the probability of one cue
    from the opposite list. Defaults mirror the target data regime: 2,000
    notes at 18% positive prevalence.
    """

    n: int = 2000
    prevalence: float = 0.18
    signal_strength: float = 0.85
    noise_rate: float = 0.03
    length_range: tuple[int, int] = (30, 120)
    seed: int = 42

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise ValueError("n must be positive")
        if not 0.0 < self.prevalence < 1.0:
            raise ValueError("prevalence must be in (0, 1)")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ValueError("signal_strength must be in [0, 1]")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ValueError("noise_rate must be in [0, 1]")
        lo, hi = self.length_range
        if lo < 5 or hi < lo:
            raise ValueError("length_range must satisfy 5 <= min <= max")


def _read_wordlist(name: str) -> list[str]:
    raw = resources.files("notebench.data").joinpath(name).read_text(encoding="utf-8")
    out = []
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def filler_vocabulary() -> list[str]:
    """Neutral filler words used for synthetic note bodies."""
    return _read_wordlist("filler_vocab.txt")


def positive_cue_phrases() -> list[str]:
    """Cue phrases associated with label 1 in synthetic notes."""
    return _read_wordlist("positive_cues.txt")


def negative_cue_phrases() -> list[str]:
    """Cue phrases associated with label 0 in synthetic notes."""
    return _read_wordlist("negative_cues.txt")


def load_corpus(path: str | Path) -> Corpus:
    """Read a JSONL corpus: one {"note_id", "text", "label"} object per line.

    Blank lines are skipped. Any malformed line raises CorpusFormatError
    naming the 1-based line number; so do duplicate ids and labels outside
    {0, 1}. Unknown fields are ignored.
    """
    path = Path(path)
    notes: list[Note] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"{path}:{lineno}: record is not an object")
            try:
                note_id = record["note_id"]
                text = record["text"]
                label = record["label"]
            except KeyError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: missing field {exc}") from exc
            if not isinstance(note_id, str) or not note_id:
                raise CorpusFormatError(f"{path}:{lineno}: note_id must be a nonempty string")
            if not isinstance(text, str):
                raise CorpusFormatError(f"{path}:{lineno}: text must be a string")
            if isinstance(label, bool) or not isinstance(label, int) or label not in (0, 1):
                raise CorpusFormatError(f"{path}:{lineno}: label must be 0 or 1, got {label!r}")
            if note_id in seen:
                raise CorpusFormatError(f"{path}:{lineno}: duplicate note_id {note_id!r}")
            seen.add(note_id)
            notes.append(Note(note_id=note_id, text=text, label=label))
    return Corpus(notes=tuple(notes))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as JSONL; load_corpus(save_corpus(c)) reproduces c."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for note in corpus:
            fh.write(
                json.dumps(
                    {"note_id": note.note_id, "text": note.text, "label": note.label},
                    ensure_ascii=False,
                )
            )
            fh.write("\n")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class _CueLists:
    positive: tuple[tuple[str, ...], ...]
    negative: tuple[tuple[str, ...], ...]


def _default_cues() -> _CueLists:
    return _CueLists(
        positive=tuple(tuple(p.split()) for p in positive_cue_phrases()),
        negative=tuple(tuple(p.split()) for p in negative_cue_phrases()),
    )


def generate_synthetic(cfg: SynthConfig) -> Corpus:
    """Generate a deterministic synthetic corpus from cfg.

    Exactly round-half-up(n * prevalence) notes get label 1. Each note is
    length_range filler tokens; with probability signal_strength it carries
    1-3 cue phrases from the label-matching list, and with probability
    noise_rate one cue from the opposite list, inserted at random token
    positions.

    Determinism: a single numpy PCG64 stream (numpy.random.default_rng(seed))
    is consumed in a fixed order - label shuffle first, then per note: body
    length, body token indices, signal coin, [cue count, then per cue phrase
    index and insert position], noise coin, [phrase index and insert
    position]. Regenerated fixtures are stable as long as that order and the
    shipped vocabularies are unchanged.
    """
    rng = np.random.default_rng(cfg.seed)
    filler = filler_vocabulary()
    cues = _default_cues()

    n_pos = _round_half_up(cfg.n * cfg.prevalence)
    labels = np.array([1] * n_pos + [0] * (cfg.n - n_pos), dtype=np.int64)
    rng.shuffle(labels)

    lo, hi = cfg.length_range
    width = max(5, len(str(cfg.n)))
    notes: list[Note] = []
    for i in range(cfg.n):
        label = int(labels[i])
        length = int(rng.integers(lo, hi + 1))
        body = rng.integers(0, len(filler), size=length)
        tokens: list[str] = [filler[j] for j in body]

        matching = cues.positive if label == 1 else cues.negative
        opposite = cues.negative if label == 1 else cues.positive
        if rng.random() < cfg.signal_strength:
            for _ in range(int(rng.integers(1, 4))):
                phrase = matching[int(rng.integers(0, len(matching)))]
                pos = int(rng.integers(0, len(tokens) + 1))
                tokens[pos:pos] = phrase
        if rng.random() < cfg.noise_rate:
            phrase = opposite[int(rng.integers(0, len(opposite)))]
            pos = int(rng.integers(0, len(tokens) + 1))
            tokens[pos:pos] = phrase

        notes.append(Note(note_id=f"note-{i:0{width}d}", text=" ".join(tokens), label=label))
    return Corpus(notes=tuple(notes))
