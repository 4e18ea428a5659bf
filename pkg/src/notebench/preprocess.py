"""Cleaning chain for clinical free text.

Order of operations: unicode normalization -> abbreviation expansion ->
lowercase/punctuation/whitespace cleanup -> optional masking of the
outcome lexicon -> EMPTY guard. Abbreviations are expanded before
punctuation removal because slash-bearing forms like "s/p" would not
survive it. Masking deletes terms outright (it never substitutes a
placeholder), which is what allows a note to end up empty.
"""

from __future__ import annotations

import json
import string
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from math import ceil
from pathlib import Path

__all__ = [
    "PreprocessConfig",
    "ChunkSpec",
    "EMPTY_PLACEHOLDER",
    "normalize_text",
    "clean_text",
    "expand_abbreviations",
    "mask_terms",
    "empty_guard",
    "preprocess_note",
    "chunk_tokens",
    "load_abbreviations",
    "load_mask_terms",
]

EMPTY_PLACEHOLDER = "EMPTY"

# Fixed transliteration table applied after NFKD + combining-mark removal.
# Code points absent from this table (and still non-ASCII) are dropped.
_TRANSLIT = {
    "⁄": "/",   # fraction slash
    "∕": "/",   # division slash
    "‐": "-",
    "‑": "-",
    "‒": "-",
    "–": "-",   # en dash
    "—": "-",   # em dash
    "―": "-",
    "−": "-",   # minus sign
    "‘": "'",
    "’": "'",
    "‚": "'",
    "“": '"',
    "”": '"',
    "„": '"',
    "×": "x",   # multiplication sign
    "µ": "u",   # micro sign
    "μ": "u",   # greek mu
    "…": "...",
}

_PUNCT_TO_SPACE = str.maketrans({c: " " for c in string.punctuation})


def load_abbreviations(path: str | Path | None = None) -> dict[str, str]:
    """Abbreviation -> expansion map; shipped defaults when path is None."""
    if path is None:
        raw = resources.files("notebench.data").joinpath("abbreviations.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    mapping = json.loads(raw)
    if not isinstance(mapping, dict):
        raise ValueError("abbreviation file must contain a JSON object")
    return {str(k): str(v) for k, v in mapping.items()}


def load_mask_terms(path: str | Path | None = None) -> list[str]:
    """Mask lexicon, one lowercase term/phrase per line, '#' comments allowed."""
    if path is None:
        raw = resources.files("notebench.data").joinpath("mask_terms.txt").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    terms = []
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            terms.append(line.lower())
    return terms


@dataclass(frozen=True)
class PreprocessConfig:
    abbrev_map: dict[str, str] = field(default_factory=load_abbreviations)
    mask_list: list[str] = field(default_factory=load_mask_terms)
    apply_mask: bool = True
    empty_placeholder: str = EMPTY_PLACEHOLDER

    def __post_init__(self) -> None:
        if self.empty_placeholder != EMPTY_PLACEHOLDER:
            raise ValueError(f"empty_placeholder is fixed to {EMPTY_PLACEHOLDER!r}")


@dataclass(frozen=True)
class ChunkSpec:
    """Token windowing: length `window`, consecutive windows overlap by 10%."""

    window: int
    overlap_fraction: float = 0.10

    def __post_init__(self) -> None:
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.overlap_fraction != 0.10:
            raise ValueError("overlap_fraction is fixed to 0.10")

    @property
    def step(self) -> int:
        return self.window - ceil(self.overlap_fraction * self.window)


def normalize_text(raw: str) -> str:
    """NFKD-normalize, strip combining marks, transliterate, drop the rest.

    "Café" and "Café" both come out as "Cafe"; a fraction slash maps
    to "/" via the fixed table; unmapped non-ASCII is removed.
    """
    decomposed = unicodedata.normalize("NFKD", raw)
    out: list[str] = []
    for ch in decomposed:
        if unicodedata.combining(ch):
            continue
        if ord(ch) < 128:
            out.append(ch)
        elif ch in _TRANSLIT:
            out.append(_TRANSLIT[ch])
    return "".join(out)


def clean_text(text: str) -> str:
    """Lowercase, punctuation -> space, collapse whitespace, trim. Idempotent."""
    lowered = text.lower().translate(_PUNCT_TO_SPACE)
    return " ".join(lowered.split())


class _PhraseIndex:
    """Whole-token phrase matcher indexed by first token (lowercase)."""

    def __init__(self, phrases: list[tuple[tuple[str, ...], str | None]]):
        self.by_first: dict[str, list[tuple[tuple[str, ...], str | None]]] = {}
        for phrase, payload in phrases:
            self.by_first.setdefault(phrase[0], []).append((phrase, payload))
        for options in self.by_first.values():
            options.sort(key=lambda kv: -len(kv[0]))  # longest phrase first

    def match(self, tokens_lower: list[str], start: int) -> tuple[int, str | None] | None:
        options = self.by_first.get(tokens_lower[start])
        if options is None:
            return None
        for phrase, payload in options:
            end = start + len(phrase)
            if end <= len(tokens_lower) and tuple(tokens_lower[start:end]) == phrase:
                return len(phrase), payload
        return None


def expand_abbreviations(text: str, abbrev_map: dict[str, str]) -> str:
    """Replace whole-token abbreviation occurrences, case-insensitively.

    Runs before clean_text so slash forms still exist. Single left-to-right
    pass over whitespace tokens; multi-token keys are allowed and longer
    keys win. Expanded output is not rescanned.
    """
    if not abbrev_map:
        return text
    index = _PhraseIndex([(tuple(k.lower().split()), v) for k, v in abbrev_map.items()])
    tokens = text.split()
    tokens_lower = [t.lower() for t in tokens]
    out: list[str] = []
    i = 0
    while i < len(tokens):
        hit = index.match(tokens_lower, i)
        if hit is not None:
            length, expansion = hit
            out.append(expansion)
            i += length
        else:
            out.append(tokens[i])
            i += 1
    return " ".join(out)


def mask_terms(text: str, terms: list[str]) -> str:
    """Delete whole-token term/phrase occurrences from cleaned text.

    Longest phrase matches first; whitespace re-collapses around deletions.
    Whole-token means "discharged" is not touched by the term "discharge";
    stem variants must be listed explicitly.
    """
    if not terms:
        return text
    index = _PhraseIndex([(tuple(t.split()), None) for t in terms])
    tokens = text.split()
    tokens_lower = [t.lower() for t in tokens]
    out: list[str] = []
    i = 0
    while i < len(tokens):
        hit = index.match(tokens_lower, i)
        if hit is not None:
            i += hit[0]
        else:
            out.append(tokens[i])
            i += 1
    return " ".join(out)


def empty_guard(text: str) -> str:
    """Return "EMPTY" for empty/whitespace-only input, else the input."""
    return text if text.strip() else EMPTY_PLACEHOLDER


def preprocess_note(raw: str, cfg: PreprocessConfig | None = None) -> str:
    """Full chain: normalize, expand, clean, mask (if enabled), EMPTY guard."""
    if cfg is None:
        cfg = PreprocessConfig()
    text = clean_text(expand_abbreviations(normalize_text(raw), cfg.abbrev_map))
    if cfg.apply_mask:
        text = mask_terms(text, cfg.mask_list)
    return empty_guard(text)


def chunk_tokens(tokens: list[str], spec: ChunkSpec) -> list[list[str]]:
    """Slice tokens into windows of at most spec.window with 10% overlap.

    Windows start at 0, step, 2*step, ... with step = window - ceil(0.1 *
    window); generation stops once a window reaches the end, so every index
    is covered and only the final window may be short. Input shorter than
    one window yields a single window.
    """
    n = len(tokens)
    if n == 0:
        return [[]]
    windows: list[list[str]] = []
    start = 0
    while True:
        end = min(start + spec.window, n)
        windows.append(tokens[start:end])
        if end >= n:
            return windows
        start += spec.step
