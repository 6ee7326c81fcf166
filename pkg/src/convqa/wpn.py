"""Word proximity network: a word co-occurrence graph weighted by NPMI.

Nodes are corpus words (stopwords excluded); an edge connects two words
that occurred within a token window of size W inside the same passage.
Edge weights are normalized pointwise mutual information values in [-1, 1].
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

from .corpus import CorpusStore

__all__ = ["Wpn", "WpnError", "build_wpn", "npmi", "has_edge", "save_wpn", "load_wpn", "export_tsv"]

_MAGIC = b"CQAWPN"
_VERSION = 1


class WpnError(Exception):
    pass


@dataclass
class Wpn:
    window: int
    vocab: dict[str, int]                      # word -> node id
    words: list[str]                           # node id -> word
    unigram_count: list[int]                   # node id -> count
    cooc_count: dict[tuple[int, int], int]     # (lo id, hi id) -> count
    total_tokens: int = 0
    total_pairs: int = 0
    _npmi_cache: dict[tuple[int, int], float] = field(default_factory=dict, repr=False)

    def node_count(self) -> int:
        return len(self.words)

    def edge_count(self) -> int:
        return len(self.cooc_count)


def build_wpn(corpus: CorpusStore, window: int = 3, min_cooc: int = 1) -> Wpn:
    """Count unigrams and in-window unordered co-occurrences over a corpus.

    For every scoring-token position j, each pair (tok_j, tok_k) with
    j < k <= j+W inside the same passage is counted once; pairs of
    identical norms are skipped. Pairs seen fewer than min_cooc times are
    pruned after counting.
    """
    if window < 1:
        raise WpnError("window must be >= 1")
    vocab: dict[str, int] = {}
    words: list[str] = []
    unigram: list[int] = []
    cooc: dict[tuple[int, int], int] = {}

    for pid in corpus.ids():
        toks = [t.norm for t in corpus.get(pid).tokens]
        ids = []
        for w in toks:
            nid = vocab.get(w)
            if nid is None:
                nid = len(words)
                vocab[w] = nid
                words.append(w)
                unigram.append(0)
            unigram[nid] += 1
            ids.append(nid)
        n = len(ids)
        for j in range(n):
            for k in range(j + 1, min(j + window, n - 1) + 1):
                a, b = ids[j], ids[k]
                if a == b:
                    continue
                key = (a, b) if a < b else (b, a)
                cooc[key] = cooc.get(key, 0) + 1

    if not words:
        raise WpnError("corpus has no scoring tokens")
    if min_cooc > 1:
        cooc = {k: c for k, c in cooc.items() if c >= min_cooc}
    return Wpn(
        window=window,
        vocab=vocab,
        words=words,
        unigram_count=unigram,
        cooc_count=cooc,
        total_tokens=sum(unigram),
        total_pairs=sum(cooc.values()),
    )


def npmi(wpn: Wpn, x: str, y: str) -> float | None:
    """NPMI edge weight for the word pair, or None if there is no edge.

    p(x) and p(y) are unigram frequencies over all scoring tokens;
    p(x,y) is the pair count over all counted pairs. The value is
    ln(p(x,y)/(p(x)p(y))) / -ln(p(x,y)), which is 1 at perfect
    co-occurrence (p(x,y)=1, taken as the analytic limit) and 0 at
    independence. The mismatched denominators can push the raw ratio
    slightly above 1 on tiny corpora, so it is capped at 1.
    """
    xi = wpn.vocab.get(x)
    yi = wpn.vocab.get(y)
    if xi is None or yi is None or xi == yi:
        return None
    key = (xi, yi) if xi < yi else (yi, xi)
    c = wpn.cooc_count.get(key)
    if not c:
        return None
    cached = wpn._npmi_cache.get(key)
    if cached is not None:
        return cached
    p_xy = c / wpn.total_pairs
    if p_xy == 1.0:
        value = 1.0
    else:
        p_x = wpn.unigram_count[xi] / wpn.total_tokens
        p_y = wpn.unigram_count[yi] / wpn.total_tokens
        value = (math.log(p_xy) - math.log(p_x) - math.log(p_y)) / -math.log(p_xy)
        if value > 1.0:
            value = 1.0
    wpn._npmi_cache[key] = value
    return value


def has_edge(wpn: Wpn, x: str, y: str, beta: float) -> bool:
    """True iff the pair has an edge whose NPMI exceeds beta."""
    value = npmi(wpn, x, y)
    return value is not None and value > beta


def save_wpn(wpn: Wpn, path) -> None:
    with open(path, "wb") as f:
        f.write(_MAGIC + struct.pack("<H", _VERSION))
        f.write(struct.pack("<IQQI", wpn.window, wpn.total_tokens, wpn.total_pairs,
                            len(wpn.words)))
        for word, count in zip(wpn.words, wpn.unigram_count):
            wb = word.encode("utf-8")
            f.write(struct.pack("<I", len(wb)) + wb + struct.pack("<Q", count))
        f.write(struct.pack("<Q", len(wpn.cooc_count)))
        for (a, b), c in sorted(wpn.cooc_count.items()):
            f.write(struct.pack("<IIQ", a, b, c))


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise WpnError(f"truncated graph file while reading {what}")
    return data


def load_wpn(path) -> Wpn:
    with open(path, "rb") as f:
        head = f.read(8)
        if len(head) != 8 or head[:6] != _MAGIC:
            raise WpnError(f"{path}: not a recognized graph file")
        (version,) = struct.unpack("<H", head[6:])
        if version != _VERSION:
            raise WpnError(f"{path}: unsupported format version {version}")
        window, total_tokens, total_pairs, n_words = struct.unpack(
            "<IQQI", _read_exact(f, 24, "header"))
        words = []
        unigram = []
        for _ in range(n_words):
            (wlen,) = struct.unpack("<I", _read_exact(f, 4, "word length"))
            words.append(_read_exact(f, wlen, "word").decode("utf-8"))
            (count,) = struct.unpack("<Q", _read_exact(f, 8, "unigram count"))
            unigram.append(count)
        (n_edges,) = struct.unpack("<Q", _read_exact(f, 8, "edge count"))
        cooc = {}
        for _ in range(n_edges):
            a, b, c = struct.unpack("<IIQ", _read_exact(f, 16, "edge"))
            cooc[(a, b)] = c
    return Wpn(
        window=window,
        vocab={w: i for i, w in enumerate(words)},
        words=words,
        unigram_count=unigram,
        cooc_count=cooc,
        total_tokens=total_tokens,
        total_pairs=total_pairs,
    )


def export_tsv(wpn: Wpn, out) -> None:
    """Debug dump: word1<TAB>word2<TAB>cooc<TAB>npmi, one edge per line."""
    for (a, b), c in sorted(wpn.cooc_count.items(), key=lambda e: (wpn.words[e[0][0]], wpn.words[e[0][1]])):
        w1, w2 = wpn.words[a], wpn.words[b]
        value = npmi(wpn, w1, w2)
        out.write(f"{w1}\t{w2}\t{c}\t{value:.6f}\n")
