"""Deterministic tokenization, stopword filtering and sentence splitting.

Every component (indexing, graph construction, query processing, display
highlighting) goes through these functions, so there is exactly one
tokenizer of record.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

__all__ = [
    "Token",
    "SentenceSpan",
    "tokenize",
    "load_stopwords",
    "default_stopwords",
    "remove_stopwords",
    "split_sentences",
]

# Unicode-aware word pieces: runs of letters/digits, underscore excluded.
_WORD_RE = re.compile(r"[^\W_]+")

# A sentence ends at terminal punctuation followed by whitespace (or at end
# of text). Abbreviations are deliberately not special-cased.
_SENT_END_RE = re.compile(r"[.!?]+(?=\s|$)")


@dataclass(frozen=True)
class Token:
    """One word occurrence: original surface form plus normalized form.

    start/end are character offsets into the source string, used for
    display highlighting.
    """

    surface: str
    norm: str
    start: int
    end: int


@dataclass(frozen=True)
class SentenceSpan:
    """Half-open [start, end) range of token indices forming one sentence."""

    start: int
    end: int


def tokenize(text: str) -> list[Token]:
    """Split text into normalized tokens.

    Splits on any non-alphanumeric character, lowercases, and drops
    single-character alphabetic tokens (so "nolan's" yields just "nolan";
    single digits are kept because numbers matter for factoid answers).
    """
    out = []
    for m in _WORD_RE.finditer(text):
        norm = m.group().lower()
        if len(norm) == 1 and norm.isalpha():
            continue
        out.append(Token(m.group(), norm, m.start(), m.end()))
    return out


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword file: one normalized word per line, UTF-8."""
    with open(path, encoding="utf-8") as f:
        return frozenset(w for w in (line.strip() for line in f) if w)


def default_stopwords() -> frozenset[str]:
    """The fixed English list shipped with the package."""
    text = resources.files("convqa.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split() if w)


def remove_stopwords(tokens: list[Token], stop: frozenset[str]) -> list[Token]:
    """Order-preserving filter of tokens whose norm is a stopword."""
    return [t for t in tokens if t.norm not in stop]


def split_sentences(text: str) -> tuple[list[Token], list[SentenceSpan]]:
    """Tokenize and group the tokens into sentences.

    The returned spans partition the token list in textual order; sentences
    that contain no tokens are dropped.
    """
    tokens = tokenize(text)
    boundaries = [m.end() for m in _SENT_END_RE.finditer(text)]

    spans = []
    bi = 0
    sent_start = 0
    for i, tok in enumerate(tokens):
        while bi < len(boundaries) and boundaries[bi] <= tok.start:
            bi += 1
            if i > sent_start:
                spans.append(SentenceSpan(sent_start, i))
                sent_start = i
    if tokens:
        spans.append(SentenceSpan(sent_start, len(tokens)))
    return tokens, spans
