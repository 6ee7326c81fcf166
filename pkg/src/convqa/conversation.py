"""Dialogue history and conversational query formulation.

The conversational query expands the current question with tokens from
earlier turns. Three strategies are supported:

  cq1  current turn + first turn, all weights 1.0
  cq2  first turn (1.0) + previous turn ((T-1)/T) + current turn (1.0)
  cq3  all turns, w_t = t/T, except w_1 = w_T = 1.0

Repeated tokens across turns are kept; the per-token max in node scoring
resolves them.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .textproc import Token, default_stopwords, remove_stopwords, tokenize

__all__ = [
    "CqStrategy",
    "Turn",
    "CqItem",
    "ConversationalQuery",
    "ConversationState",
    "ConversationError",
    "make_turn",
    "formulate_cq",
    "load_topics",
]


class ConversationError(Exception):
    pass


class CqStrategy(enum.Enum):
    CQ1 = "cq1"
    CQ2 = "cq2"
    CQ3 = "cq3"

    @classmethod
    def parse(cls, name: str) -> "CqStrategy":
        try:
            return cls(name.lower())
        except ValueError:
            raise ConversationError(f"unknown strategy: {name!r}") from None


@dataclass(frozen=True)
class Turn:
    index: int                 # 1-based turn number
    raw: str
    tokens: tuple[Token, ...]  # stopwords removed


@dataclass(frozen=True)
class CqItem:
    token: str     # normalized form
    turn: int
    weight: float


ConversationalQuery = list[CqItem]


def make_turn(index: int, raw: str, stop: frozenset[str] | None = None) -> Turn:
    """Tokenize and filter one question; rejects questions that leave no
    content tokens after stopword removal."""
    stop = default_stopwords() if stop is None else stop
    tokens = tuple(remove_stopwords(tokenize(raw), stop))
    if not tokens:
        raise ConversationError(f"turn {index}: no content tokens in {raw!r}")
    return Turn(index, raw, tokens)


def _items(turn: Turn, weight: float) -> list[CqItem]:
    return [CqItem(t.norm, turn.index, weight) for t in turn.tokens]


def formulate_cq(history: list[Turn], strategy: CqStrategy) -> ConversationalQuery:
    """Assemble the weighted conversational query from the dialogue history."""
    if not history:
        raise ConversationError("empty conversation history")
    T = history[-1].index
    first, last = history[0], history[-1]

    if T == 1:
        return _items(first, 1.0)

    if strategy is CqStrategy.CQ1:
        return _items(first, 1.0) + _items(last, 1.0)

    if strategy is CqStrategy.CQ2:
        items = _items(first, 1.0)
        if T - 1 >= 2:
            items += _items(history[-2], (T - 1) / T)
        return items + _items(last, 1.0)

    items = []
    for turn in history:
        if turn.index == 1 or turn.index == T:
            weight = 1.0
        else:
            weight = turn.index / T
        items += _items(turn, weight)
    return items


class ConversationState:
    """Single-session turn buffer used by the interactive CLI."""

    def __init__(self, stop: frozenset[str] | None = None):
        self._stop = default_stopwords() if stop is None else stop
        self.turns: list[Turn] = []

    def append_turn(self, raw: str) -> Turn:
        turn = make_turn(len(self.turns) + 1, raw, self._stop)
        self.turns.append(turn)
        return turn

    def clear_last(self) -> None:
        if not self.turns:
            raise ConversationError("no turn to clear")
        self.turns.pop()

    def clear_all(self) -> None:
        self.turns.clear()


def load_topics(path) -> list[tuple[str, list[tuple[int, str]]]]:
    """Parse a topics file: JSON list of {number, turns:[{number, raw_utterance}]}.

    Returns (topic number, [(turn number, utterance), ...]) pairs in file
    order; the query id of a turn is "<topic>_<turn>".
    """
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConversationError(f"{path}: invalid JSON at line {e.lineno}") from None
    if not isinstance(data, list):
        raise ConversationError(f"{path}: expected a JSON list of topics")
    topics = []
    for i, topic in enumerate(data):
        if not isinstance(topic, dict) or "number" not in topic or "turns" not in topic:
            raise ConversationError(f"{path}: topic {i}: missing 'number' or 'turns'")
        turns = []
        for j, turn in enumerate(topic["turns"]):
            if not isinstance(turn, dict) or "raw_utterance" not in turn:
                raise ConversationError(
                    f"{path}: topic {topic['number']}: turn {j}: missing 'raw_utterance'")
            number = int(turn.get("number", j + 1))
            turns.append((number, str(turn["raw_utterance"])))
        topics.append((str(topic["number"]), turns))
    return topics
