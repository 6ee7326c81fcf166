"""Built-in lexical candidate retriever: an inverted index scored with
Okapi BM25 (k1=0.9, b=0.4) over the weighted conversational query.

Stands in for an external baseline engine; downstream re-ranking only
consumes the candidate pool and the reciprocal baseline rank.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from .conversation import ConversationalQuery
from .corpus import CorpusStore

__all__ = [
    "InvertedIndex",
    "Candidate",
    "CandidateList",
    "IndexError_",
    "build_index",
    "save_index",
    "load_index",
    "retrieve",
    "retrieve_union",
]

_MAGIC = b"CQAINV"
_VERSION = 1

BM25_K1 = 0.9
BM25_B = 0.4


class IndexError_(Exception):
    """Raised on index build/load failures (trailing underscore avoids the
    builtin)."""


@dataclass(frozen=True)
class Candidate:
    pid: str
    score: float
    rank: int  # 1-based baseline rank


@dataclass
class CandidateList:
    entries: list[Candidate]
    prior_usable: bool = True  # False for union mode: ranks are incomparable

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [c.pid for c in self.entries]


class InvertedIndex:
    def __init__(self, postings: dict[str, list[tuple[str, int]]],
                 doc_len: dict[str, int]):
        self.postings = postings
        self.doc_len = doc_len
        self.N = len(doc_len)
        self.avg_len = (sum(doc_len.values()) / self.N) if self.N else 0.0

    def vocab_size(self) -> int:
        return len(self.postings)


def build_index(corpus: CorpusStore) -> InvertedIndex:
    """Index scoring-token frequencies per passage; postings sorted by id."""
    if corpus.doc_count == 0:
        raise IndexError_("cannot index an empty corpus")
    postings: dict[str, dict[str, int]] = {}
    doc_len: dict[str, int] = {}
    for pid in corpus.ids():
        toks = corpus.get(pid).tokens
        doc_len[pid] = len(toks)
        for t in toks:
            postings.setdefault(t.norm, {})
            postings[t.norm][pid] = postings[t.norm].get(pid, 0) + 1
    sorted_postings = {
        term: sorted(bypid.items()) for term, bypid in sorted(postings.items())
    }
    return InvertedIndex(sorted_postings, doc_len)


def _idf(n_docs: int, df: int) -> float:
    # Non-negative BM25 idf so "no term match" and "score 0" coincide.
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def retrieve(index: InvertedIndex, cq: ConversationalQuery, k: int) -> CandidateList:
    """Top-k passages by BM25, each query item weighted by its turn weight.

    Ties break by ascending passage id; ranks are contiguous from 1.
    """
    if k < 1:
        raise IndexError_("k must be >= 1")
    scores: dict[str, float] = {}
    for item in cq:
        plist = index.postings.get(item.token)
        if not plist:
            continue
        idf = _idf(index.N, len(plist))
        for pid, tf in plist:
            denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * index.doc_len[pid] / index.avg_len)
            contrib = item.weight * idf * (tf * (BM25_K1 + 1.0) / denom)
            scores[pid] = scores.get(pid, 0.0) + contrib
    ranked = sorted(scores.items(), key=lambda e: (-e[1], e[0]))[:k]
    return CandidateList(
        [Candidate(pid, score, r) for r, (pid, score) in enumerate(ranked, 1)])


def retrieve_union(index: InvertedIndex, queries: list[ConversationalQuery],
                   k: int) -> CandidateList:
    """Union of the per-query top-k pools.

    The per-query rankings are incomparable, so baseline scores/ranks are
    unusable: entries are ordered by ascending passage id with zero scores,
    and the result is flagged so the ranker can insist on a zero prior
    weight.
    """
    if not queries:
        raise IndexError_("union retrieval needs at least one query")
    ids: set[str] = set()
    for cq in queries:
        ids.update(retrieve(index, cq, k).ids())
    entries = [Candidate(pid, 0.0, r) for r, pid in enumerate(sorted(ids), 1)]
    return CandidateList(entries, prior_usable=False)


def save_index(index: InvertedIndex, path) -> None:
    with open(path, "wb") as f:
        f.write(_MAGIC + struct.pack("<H", _VERSION))
        f.write(struct.pack("<Q", len(index.doc_len)))
        for pid, dl in index.doc_len.items():
            pb = pid.encode("utf-8")
            f.write(struct.pack("<I", len(pb)) + pb + struct.pack("<Q", dl))
        f.write(struct.pack("<Q", len(index.postings)))
        for term, plist in index.postings.items():
            tb = term.encode("utf-8")
            f.write(struct.pack("<I", len(tb)) + tb + struct.pack("<Q", len(plist)))
            for pid, tf in plist:
                pb = pid.encode("utf-8")
                f.write(struct.pack("<I", len(pb)) + pb + struct.pack("<Q", tf))


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise IndexError_(f"truncated index file while reading {what}")
    return data


def load_index(path) -> InvertedIndex:
    with open(path, "rb") as f:
        head = f.read(8)
        if len(head) != 8 or head[:6] != _MAGIC:
            raise IndexError_(f"{path}: not a recognized index file")
        (version,) = struct.unpack("<H", head[6:])
        if version != _VERSION:
            raise IndexError_(f"{path}: unsupported format version {version}")
        (n_docs,) = struct.unpack("<Q", _read_exact(f, 8, "doc count"))
        doc_len = {}
        for _ in range(n_docs):
            (plen,) = struct.unpack("<I", _read_exact(f, 4, "id length"))
            pid = _read_exact(f, plen, "id").decode("utf-8")
            (dl,) = struct.unpack("<Q", _read_exact(f, 8, "doc length"))
            doc_len[pid] = dl
        (n_terms,) = struct.unpack("<Q", _read_exact(f, 8, "term count"))
        postings = {}
        for _ in range(n_terms):
            (tlen,) = struct.unpack("<I", _read_exact(f, 4, "term length"))
            term = _read_exact(f, tlen, "term").decode("utf-8")
            (n_post,) = struct.unpack("<Q", _read_exact(f, 8, "postings length"))
            plist = []
            for _ in range(n_post):
                (plen,) = struct.unpack("<I", _read_exact(f, 4, "id length"))
                pid = _read_exact(f, plen, "id").decode("utf-8")
                (tf,) = struct.unpack("<Q", _read_exact(f, 8, "term frequency"))
                plist.append((pid, tf))
            postings[term] = plist
    return InvertedIndex(postings, doc_len)
