"""Word embedding store with cosine similarity lookups.

Loads the standard word2vec text format and L2-normalizes every vector at
load time, so cosine similarity is a plain dot product on the hot path.
"""

from __future__ import annotations

import logging

import numpy as np

__all__ = ["EmbeddingStore", "EmbeddingError", "load_embeddings", "sim"]

logger = logging.getLogger(__name__)


class EmbeddingError(Exception):
    pass


class EmbeddingStore:
    def __init__(self, dim: int, vectors: dict[str, np.ndarray]):
        self.dim = dim
        self.vectors = vectors

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def load_embeddings(path) -> EmbeddingStore:
    """Read word2vec text format: header "<count> <dim>", then one
    "word v1 ... v_dim" line per word. Duplicate words keep the first
    occurrence (with a warning); zero vectors are rejected.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"{path}: expected header '<count> <dim>'")
        try:
            _count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingError(f"{path}: expected header '<count> <dim>'") from None
        if dim < 1:
            raise EmbeddingError(f"{path}: dimension must be >= 1")
        for lineno, line in enumerate(f, 2):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            word = parts[0]
            if len(parts) - 1 != dim:
                raise EmbeddingError(
                    f"{path}: line {lineno}: expected {dim} components, got {len(parts) - 1}")
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingError(f"{path}: line {lineno}: unparsable float") from None
            if word in vectors:
                logger.warning("duplicate embedding for %r (line %d ignored)", word, lineno)
                continue
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise EmbeddingError(f"{path}: line {lineno}: zero vector for {word!r}")
            vectors[word] = vec / norm
    return EmbeddingStore(dim, vectors)


def sim(store: EmbeddingStore, a: str, b: str) -> float | None:
    """Cosine similarity between two words.

    Identical normalized strings compare at 1.0 even out of vocabulary
    (exact term matches must count for rare entities); a pair with an
    unknown word and unequal strings has no similarity at all.
    """
    if a == b:
        return 1.0
    va = store.vectors.get(a)
    vb = store.vectors.get(b)
    if va is None or vb is None:
        return None
    return float(np.dot(va, vb))
