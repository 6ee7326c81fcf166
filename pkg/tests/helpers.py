"""Shared fixture builders for the test suite."""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass
from importlib import resources

from convqa import corpus as corpus_mod
from convqa import embeddings as emb_mod
from convqa import retrieval as retrieval_mod
from convqa import wpn as wpn_mod

_DATA = resources.files("convqa.data")


def data_path(name: str) -> str:
    return str(_DATA / name)


def write_tsv(path, rows: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for pid, text in rows:
            f.write(f"{pid}\t{text}\n")


def make_store(tmpdir, rows: list[tuple[str, str]], name: str = "corpus"):
    src = os.path.join(str(tmpdir), name + ".tsv")
    write_tsv(src, rows)
    return corpus_mod.ingest(src, os.path.join(str(tmpdir), name), fmt="tsv")


def build_toy_artifacts(tmpdir):
    """Corpus store, index, graph and embeddings for the bundled fixture."""
    store = corpus_mod.ingest(data_path("batman_corpus.tsv"),
                              os.path.join(str(tmpdir), "corpus"), fmt="tsv")
    index = retrieval_mod.build_index(store)
    graph = wpn_mod.build_wpn(store, window=3)
    emb = emb_mod.load_embeddings(data_path("toy_embeddings.txt"))
    return store, index, graph, emb


SAMPLE_CONVERSATION = [
    "when did nolan make his batman movies?",
    "who played the role of alfred?",
    "and what about harvey dent?",
    "how was the box office reception?",
    "compared to Batman v Superman?",
]


# ------------------------------------------------- random fixture makers

@dataclass
class RandomCorpus:
    rows: list[tuple[str, str]]                      # (pid, text)
    doc_views: dict[str, tuple[list[str], list[int], int]]
    token_lists: list[list[str]]
    window: int


def random_corpus(rng: random.Random, max_passages: int = 12,
                  max_len: int = 25, vocab_size: int | None = None,
                  total_budget: int = 1000, sentences: bool = False) -> RandomCorpus:
    """Synthetic corpus with ground-truth token structure.

    Tokens are drawn from a synthetic vocabulary (w000...) so the
    package tokenizer reproduces them exactly; doc_views carries the
    generator's own token/sentence structure for the oracles.
    """
    vocab_size = vocab_size or rng.randint(5, 30)
    vocab = [f"w{i:03d}" for i in range(vocab_size)]
    n_passages = rng.randint(3, max_passages)
    window = rng.randint(1, 5)

    rows = []
    doc_views = {}
    token_lists = []
    budget = total_budget
    for p in range(n_passages):
        length = rng.randint(2, min(max_len, max(2, budget)))
        budget -= length
        toks = [rng.choice(vocab) for _ in range(length)]
        pieces = []
        sent_of = []
        sent = 0
        for i, tok in enumerate(toks):
            sent_of.append(sent)
            brk = sentences and i < length - 1 and rng.random() < 0.15
            pieces.append(tok + "." if brk else tok)
            if brk:
                sent += 1
        pid = f"P{p:03d}"
        rows.append((pid, " ".join(pieces)))
        doc_views[pid] = (toks, sent_of, sent + 1)
        token_lists.append(toks)
        if budget <= 2:
            break
    return RandomCorpus(rows, doc_views, token_lists, window)


def random_embeddings_text(rng: random.Random, vocab: list[str], dim: int = 8,
                           oov_rate: float = 0.1) -> str:
    """word2vec text for most of the vocabulary, with cluster structure so
    some word pairs land above typical alpha thresholds and some below."""
    n_clusters = max(1, len(vocab) // 3)
    bases = {}
    for c in range(n_clusters):
        bases[c] = [rng.gauss(0, 1) for _ in range(dim)]
    lines = []
    kept = 0
    for w in vocab:
        if rng.random() < oov_rate:
            continue
        base = bases[rng.randrange(n_clusters)]
        spread = rng.uniform(0.05, 0.6) / math.sqrt(dim)
        vec = [b + rng.gauss(0, spread) for b in base]
        lines.append(w + " " + " ".join(f"{v:.6f}" for v in vec))
        kept += 1
    return f"{kept} {dim}\n" + "\n".join(lines) + ("\n" if lines else "")


def random_conversation(rng: random.Random, vocab: list[str],
                        max_turns: int = 4) -> list[list[str]]:
    n_turns = rng.randint(1, max_turns)
    return [[rng.choice(vocab) for _ in range(rng.randint(2, 5))]
            for _ in range(n_turns)]
