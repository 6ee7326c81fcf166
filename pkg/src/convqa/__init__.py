"""Unsupervised conversational question answering over passage corpora.

Builds a word proximity network (a co-occurrence graph weighted by
normalized pointwise mutual information) from the corpus, expands each
question with context from earlier dialogue turns, retrieves candidates
with a built-in BM25 retriever, and re-ranks them by a weighted
combination of embedding similarity, graph coherence, match position and
the retrieval prior.
"""

__version__ = "0.1.0"

from .conversation import ConversationState, CqStrategy, formulate_cq, make_turn
from .corpus import CorpusStore, Passage, ingest, open_store
from .embeddings import EmbeddingStore, load_embeddings, sim
from .pipeline import ArtifactPaths, Engine
from .ranker import RankerParams, ScoredPassage, preset, rank_candidates
from .retrieval import build_index, load_index, retrieve, retrieve_union, save_index
from .textproc import Token, default_stopwords, remove_stopwords, split_sentences, tokenize
from .wpn import Wpn, build_wpn, has_edge, load_wpn, npmi, save_wpn

__all__ = [
    "__version__",
    "ConversationState", "CqStrategy", "formulate_cq", "make_turn",
    "CorpusStore", "Passage", "ingest", "open_store",
    "EmbeddingStore", "load_embeddings", "sim",
    "ArtifactPaths", "Engine",
    "RankerParams", "ScoredPassage", "preset", "rank_candidates",
    "build_index", "load_index", "retrieve", "retrieve_union", "save_index",
    "Token", "default_stopwords", "remove_stopwords", "split_sentences", "tokenize",
    "Wpn", "build_wpn", "has_edge", "load_wpn", "npmi", "save_wpn",
]
