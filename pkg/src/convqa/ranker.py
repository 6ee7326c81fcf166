"""Candidate passage scoring and re-ranking.

Four signals are combined per passage:

  node score   sum over passage tokens of the best (similarity x turn
               weight) against the conversational query, gated by a
               similarity threshold alpha
  edge score   sum of graph edge weights over in-window passage token
               pairs whose two tokens best-match two distinct query
               tokens, gated by an edge threshold beta
  position     max over sentences of (1/j) x that sentence's node+edge
               mass, preferring passages that answer early
  prior        reciprocal rank in the baseline retrieval

The total is the weighted sum h1*prior + h2*node + h3*edge + h4*pos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import CorpusStore, Passage
from .conversation import ConversationalQuery, CqStrategy
from .embeddings import EmbeddingStore, sim
from .retrieval import CandidateList
from .wpn import Wpn, npmi

__all__ = [
    "RankerParams",
    "ParamError",
    "TokenMatch",
    "EdgeUse",
    "ScoredPassage",
    "score_node",
    "score_edge",
    "score_pos",
    "score_prior",
    "rank_candidates",
    "preset",
    "PRESETS",
]

TOP_NODE_COUNT = 5
TOP_EDGE_COUNT = 5


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class RankerParams:
    """The full tunable surface of the ranker (the demo's advanced options)."""

    alpha: float = 0.7
    beta: float = 0.0
    window: int = 3
    h1: float = 0.6   # prior (baseline retrieval) weight
    h2: float = 0.3   # node score weight
    h3: float = 0.1   # edge score weight
    h4: float = 0.0   # position score weight
    pool_k: int = 1000
    display_k: int = 3
    strategy: CqStrategy = CqStrategy.CQ1
    union: bool = False

    def weights(self) -> tuple[float, float, float, float]:
        return (self.h1, self.h2, self.h3, self.h4)

    def validate(self, tol: float = 1e-9) -> None:
        """Library-level invariants (the service applies the narrower UI
        ranges on top)."""
        if any(h < 0 for h in self.weights()):
            raise ParamError("hyperparameter weights must be non-negative")
        if abs(sum(self.weights()) - 1.0) > tol:
            raise ParamError("weights must sum to 1")
        if not -1.0 <= self.alpha <= 1.0:
            raise ParamError("alpha must be within [-1, 1]")
        if not -1.0 <= self.beta <= 1.0:
            raise ParamError("beta must be within [-1, 1]")
        if self.window < 1:
            raise ParamError("window must be >= 1")
        if self.pool_k < 1:
            raise ParamError("pool size must be >= 1")
        if self.display_k < 1:
            raise ParamError("display count must be >= 1")
        if self.union and self.h1 != 0.0:
            raise ParamError("union retrieval makes baseline ranks incomparable; "
                             "the prior weight h1 must be 0")

    def validate_ui(self) -> None:
        """The constrained ranges exposed to end users."""
        if not 0.5 <= self.alpha <= 1.0:
            raise ParamError("alpha must be within [0.5, 1.0]")
        if not 0.0 <= self.beta <= 0.1:
            raise ParamError("beta must be within [0.0, 0.1]")
        if any(h < 0 for h in self.weights()):
            raise ParamError("hyperparameter weights must be non-negative")
        if abs(sum(self.weights()) - 1.0) > 1e-6:
            raise ParamError("weights must sum to 1")
        self.validate(tol=1e-6)


PRESETS: dict[str, RankerParams] = {
    "run1": RankerParams(alpha=0.7, beta=0.0, h1=0.6, h2=0.3, h3=0.1, h4=0.0,
                         strategy=CqStrategy.CQ1),
    "run2": RankerParams(alpha=0.7, beta=0.0, h1=0.9, h2=0.1, h3=0.0, h4=0.0,
                         strategy=CqStrategy.CQ1),
    "run3": RankerParams(alpha=0.7, beta=0.0, h1=0.0, h2=0.6, h3=0.4, h4=0.0,
                         strategy=CqStrategy.CQ1, union=True),
    "run4": RankerParams(alpha=0.85, beta=0.0, h1=0.6, h2=0.3, h3=0.1, h4=0.0,
                         strategy=CqStrategy.CQ2),
}


def preset(name: str) -> RankerParams:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise ParamError(f"unknown preset: {name!r} (expected run1..run4)") from None


@dataclass(frozen=True)
class TokenMatch:
    """Best query-token match for one passage token position.

    query_token is the argmax by raw similarity (earliest query item on
    ties); contribution is the node-score term, the max over query items
    of similarity x turn weight.
    """

    position: int
    query_token: str
    similarity: float
    weight: float
    contribution: float


@dataclass(frozen=True)
class EdgeUse:
    """One passage token pair that contributed to the edge score."""

    pos_a: int
    pos_b: int
    word_a: str
    word_b: str
    value: float


@dataclass
class ScoredPassage:
    pid: str
    total: float
    prior_score: float
    node_score: float
    edge_score: float
    pos_score: float
    top_nodes: list[tuple[str, str, float]] = field(default_factory=list)
    top_edges: list[tuple[tuple[str, str], float]] = field(default_factory=list)
    highlight: list[int] = field(default_factory=list)


_MISSING = object()


def _compute_matches(passage: Passage, cq: ConversationalQuery,
                     store: EmbeddingStore, alpha: float) -> dict[int, TokenMatch]:
    """Per passage position, the best query match where some similarity
    exceeds alpha."""
    matches: dict[int, TokenMatch] = {}
    cache: dict[str, tuple[float, str, float, float] | None] = {}
    for j, tok in enumerate(passage.tokens):
        best = cache.get(tok.norm, _MISSING)
        if best is _MISSING:
            best_sim = None
            best_item = None
            best_contrib = None
            for item in cq:
                s = sim(store, tok.norm, item.token)
                if s is None:
                    continue
                if best_sim is None or s > best_sim:
                    best_sim = s
                    best_item = item
                contrib = s * item.weight
                if best_contrib is None or contrib > best_contrib:
                    best_contrib = contrib
            if best_sim is None or best_sim <= alpha:
                best = None
            else:
                best = (best_sim, best_item.token, best_item.weight, best_contrib)
            cache[tok.norm] = best
        if best is not None:
            matches[j] = TokenMatch(j, best[1], best[0], best[2], best[3])
    return matches


def score_node(passage: Passage, cq: ConversationalQuery, store: EmbeddingStore,
               alpha: float) -> tuple[float, list[TokenMatch]]:
    """Node score plus the per-position matches (every occurrence counts)."""
    matches = _compute_matches(passage, cq, store, alpha)
    total = 0.0
    for m in matches.values():
        total += m.contribution
    return total, list(matches.values())


def _edges_from_matches(passage: Passage, matches: dict[int, TokenMatch],
                        graph: Wpn, beta: float, window: int) -> list[EdgeUse]:
    uses = []
    n = len(passage.tokens)
    for j in range(n):
        mj = matches.get(j)
        if mj is None:
            continue
        for k in range(j + 1, min(j + window, n - 1) + 1):
            mk = matches.get(k)
            if mk is None or mj.query_token == mk.query_token:
                continue
            a, b = passage.tokens[j].norm, passage.tokens[k].norm
            value = npmi(graph, a, b)
            if value is not None and value > beta:
                uses.append(EdgeUse(j, k, a, b, value))
    return uses


def score_edge(passage: Passage, cq: ConversationalQuery, graph: Wpn,
               store: EmbeddingStore, alpha: float, beta: float,
               window: int) -> tuple[float, list[EdgeUse]]:
    """Edge score: in-window token pairs whose endpoints best-match two
    distinct query tokens and carry a graph edge above beta."""
    matches = _compute_matches(passage, cq, store, alpha)
    uses = _edges_from_matches(passage, matches, graph, beta, window)
    return sum(u.value for u in uses), uses


def _sentence_masses(passage: Passage, matches: dict[int, TokenMatch],
                     uses: list[EdgeUse]) -> tuple[list[float], list[float]]:
    n_sent = len(passage.sentences)
    node_by_s = [0.0] * n_sent
    edge_by_s = [0.0] * n_sent
    for j, m in matches.items():
        node_by_s[passage.token_sentence[j]] += m.contribution
    for u in uses:
        sa = passage.token_sentence[u.pos_a]
        sb = passage.token_sentence[u.pos_b]
        if sa == sb:  # pairs straddling a sentence boundary carry no mass
            edge_by_s[sa] += u.value
    return node_by_s, edge_by_s


def score_pos(node_by_sentence: list[float], edge_by_sentence: list[float]) -> float:
    """Max over sentences of (1/j) x sentence mass, j 1-based."""
    best = 0.0
    for j, (nm, em) in enumerate(zip(node_by_sentence, edge_by_sentence), 1):
        best = max(best, (nm + em) / j)
    return best


def score_prior(rank: int) -> float:
    """Reciprocal baseline rank."""
    if rank < 1:
        raise ParamError("rank must be >= 1")
    return 1.0 / rank


def _highlight_count(n_sentences: int) -> int:
    if n_sentences == 0:
        return 0
    return min(3, max(1, math.ceil(n_sentences / 3)))


def _select_top_nodes(matches: dict[int, TokenMatch],
                      passage: Passage) -> list[tuple[str, str, float]]:
    best: dict[str, TokenMatch] = {}
    for j in sorted(matches):
        m = matches[j]
        word = passage.tokens[j].norm
        cur = best.get(word)
        if cur is None or m.contribution > cur.contribution:
            best[word] = m
    ranked = sorted(best.items(), key=lambda e: (-e[1].contribution, e[0]))
    return [(word, m.query_token, m.similarity) for word, m in ranked[:TOP_NODE_COUNT]]


def _select_top_edges(uses: list[EdgeUse]) -> list[tuple[tuple[str, str], float]]:
    best: dict[tuple[str, str], float] = {}
    for u in uses:
        pair = (u.word_a, u.word_b) if u.word_a < u.word_b else (u.word_b, u.word_a)
        best.setdefault(pair, u.value)
    ranked = sorted(best.items(), key=lambda e: (-e[1], e[0]))
    return ranked[:TOP_EDGE_COUNT]


def _select_highlight(node_by_s: list[float], edge_by_s: list[float]) -> list[int]:
    count = _highlight_count(len(node_by_s))
    masses = [nm + em for nm, em in zip(node_by_s, edge_by_s)]
    order = sorted(range(len(masses)), key=lambda i: (-masses[i], i))
    return sorted(order[:count])


def rank_candidates(candidates: CandidateList, cq: ConversationalQuery,
                    params: RankerParams, graph: Wpn, store: EmbeddingStore,
                    corpus: CorpusStore) -> list[ScoredPassage]:
    """Score every candidate and sort by total descending (ties by id)."""
    params.validate()
    if not candidates.prior_usable and params.h1 != 0.0:
        raise ParamError("union retrieval makes baseline ranks incomparable; "
                         "the prior weight h1 must be 0")
    results = []
    for cand in candidates.entries:
        passage = corpus.get(cand.pid)
        matches = _compute_matches(passage, cq, store, params.alpha)
        node = 0.0
        for m in matches.values():
            node += m.contribution
        uses = _edges_from_matches(passage, matches, graph, params.beta, params.window)
        edge = sum(u.value for u in uses)
        node_by_s, edge_by_s = _sentence_masses(passage, matches, uses)
        pos = score_pos(node_by_s, edge_by_s)
        prior = score_prior(cand.rank) if candidates.prior_usable else 0.0
        total = params.h1 * prior + params.h2 * node + params.h3 * edge + params.h4 * pos
        results.append(ScoredPassage(
            pid=cand.pid,
            total=total,
            prior_score=prior,
            node_score=node,
            edge_score=edge,
            pos_score=pos,
            top_nodes=_select_top_nodes(matches, passage),
            top_edges=_select_top_edges(uses),
            highlight=_select_highlight(node_by_s, edge_by_s),
        ))
    results.sort(key=lambda r: (-r.total, r.pid))
    return results
