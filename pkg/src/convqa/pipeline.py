"""Answer pipeline: artifact loading plus the formulate → retrieve → rank
flow shared by the CLI and the HTTP service.

Stateless by design: every call receives the full question history, so
concurrent callers never share mutable state.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass

from .conversation import CqItem, Turn, formulate_cq, make_turn
from .corpus import CorpusStore, Passage, open_store
from .embeddings import EmbeddingStore, load_embeddings
from .ranker import RankerParams, ScoredPassage, rank_candidates
from .retrieval import InvertedIndex, load_index, retrieve, retrieve_union
from .textproc import default_stopwords
from .wpn import Wpn, load_wpn

__all__ = ["ArtifactPaths", "Engine", "render_result"]


@dataclass(frozen=True)
class ArtifactPaths:
    corpus: str
    index: str
    wpn: str
    embeddings: str


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Engine:
    """Immutable bundle of loaded artifacts; safe for concurrent answer()."""

    def __init__(self, corpus: CorpusStore, index: InvertedIndex, graph: Wpn,
                 embeddings: EmbeddingStore, defaults: RankerParams):
        self.corpus = corpus
        self.index = index
        self.graph = graph
        self.embeddings = embeddings
        self.defaults = defaults
        self.stopwords = default_stopwords()
        self.checksums: dict[str, str] = {}

    @classmethod
    def load(cls, paths: ArtifactPaths, defaults: RankerParams) -> "Engine":
        engine = cls(
            corpus=open_store(paths.corpus),
            index=load_index(paths.index),
            graph=load_wpn(paths.wpn),
            embeddings=load_embeddings(paths.embeddings),
            defaults=defaults,
        )
        engine.checksums = {
            "corpus": _sha256(paths.corpus),
            "index": _sha256(paths.index),
            "wpn": _sha256(paths.wpn),
            "embeddings": _sha256(paths.embeddings),
        }
        return engine

    def make_history(self, questions: list[str]) -> list[Turn]:
        return [make_turn(i, q, self.stopwords) for i, q in enumerate(questions, 1)]

    def answer(self, questions: list[str],
               params: RankerParams | None = None) -> tuple[list[ScoredPassage], list[CqItem]]:
        """Answer the last question of a conversation.

        questions holds the full history in turn order, current question
        last. Returns all ranked candidates; callers slice to display_k.
        """
        params = self.defaults if params is None else params
        params.validate()
        history = self.make_history(questions)
        cq = formulate_cq(history, params.strategy)
        if params.union:
            first = [CqItem(t.norm, 1, 1.0) for t in history[0].tokens]
            current = [CqItem(t.norm, history[-1].index, 1.0) for t in history[-1].tokens]
            candidates = retrieve_union(self.index, [first, current, cq], params.pool_k)
        else:
            candidates = retrieve(self.index, cq, params.pool_k)
        ranked = rank_candidates(candidates, cq, params, self.graph,
                                 self.embeddings, self.corpus)
        return ranked, cq

    def timed_answer(self, questions: list[str], params: RankerParams | None = None):
        start = time.perf_counter()
        ranked, cq = self.answer(questions, params)
        return ranked, cq, (time.perf_counter() - start) * 1000.0


def _sentence_char_spans(passage: Passage) -> list[tuple[int, int]]:
    spans = []
    text = passage.text
    for s in passage.sentences:
        start = passage.display_tokens[s.start].start
        end = passage.display_tokens[s.end - 1].end
        while end < len(text) and not text[end].isspace():
            end += 1
        spans.append((start, end))
    return spans


def render_result(passage: Passage, scored: ScoredPassage) -> dict:
    """JSON-able view of one scored passage for the wire and the CLI.

    Includes character spans (sentences and bold keyword occurrences) so
    clients can highlight without re-tokenizing.
    """
    bold_words = {word for word, _, _ in scored.top_nodes}
    bold_spans = [(t.start, t.end) for t in passage.display_tokens if t.norm in bold_words]
    return {
        "id": scored.pid,
        "text": passage.text,
        "total": scored.total,
        "components": {
            "prior": scored.prior_score,
            "node": scored.node_score,
            "edge": scored.edge_score,
            "pos": scored.pos_score,
        },
        "top_nodes": [
            {"word": w, "query_token": q, "similarity": s} for w, q, s in scored.top_nodes
        ],
        "top_edges": [
            {"words": list(pair), "npmi": v} for pair, v in scored.top_edges
        ],
        "highlight": list(scored.highlight),
        "sentences": [list(span) for span in _sentence_char_spans(passage)],
        "bold_spans": [list(span) for span in bold_spans],
    }
