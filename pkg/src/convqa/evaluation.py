"""TREC-style evaluation: qrels, run files, nDCG / ERR / AP, turn-wise tables.

Conventions pinned for reproducibility: nDCG gain 2^g - 1 with log2
discount, ERR per the standard cascade model with R = (2^g - 1)/2^g_max,
and AP over grades binarized at a configurable threshold (default >= 1).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "Qrels",
    "RunRecord",
    "EvalError",
    "read_qrels",
    "write_run",
    "read_run",
    "ndcg_at_k",
    "err_at_k",
    "ap_at_k",
    "turnwise_report",
    "format_report",
    "report_tsv",
]

_QID_RE = re.compile(r"^(.+)_(\d+)$")


class EvalError(Exception):
    pass


@dataclass
class Qrels:
    judgments: dict[tuple[str, str], int]
    g_max: int

    def grade(self, qid: str, pid: str) -> int:
        return self.judgments.get((qid, pid), 0)

    def judged_for(self, qid: str) -> dict[str, int]:
        return {pid: g for (q, pid), g in self.judgments.items() if q == qid}

    def qids(self) -> list[str]:
        return sorted({q for q, _ in self.judgments})


@dataclass(frozen=True)
class RunRecord:
    qid: str
    pid: str
    rank: int
    score: float
    tag: str


def read_qrels(path) -> Qrels:
    """TREC qrels format: "qid 0 docid grade", whitespace separated."""
    judgments = {}
    g_max = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise EvalError(f"{path}: line {lineno}: expected 4 fields")
            try:
                grade = int(parts[3])
            except ValueError:
                raise EvalError(f"{path}: line {lineno}: bad grade {parts[3]!r}") from None
            if grade < 0:
                raise EvalError(f"{path}: line {lineno}: negative grade")
            judgments[(parts[0], parts[2])] = grade
            g_max = max(g_max, grade)
    return Qrels(judgments, g_max)


def write_run(records: list[RunRecord], path) -> None:
    """Write the 6-column run format "qid Q0 docid rank score tag"."""
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(f"{r.qid} Q0 {r.pid} {r.rank} {r.score:.6f} {r.tag}\n")


def read_run(path) -> list[RunRecord]:
    """Inverse of write_run; validates per-query rank contiguity and
    non-increasing scores."""
    records = []
    last_rank: dict[str, int] = {}
    last_score: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6 or parts[1] != "Q0":
                raise EvalError(f"{path}: line {lineno}: expected 'qid Q0 docid rank score tag'")
            qid, _, pid, rank_s, score_s, tag = parts
            try:
                rank = int(rank_s)
                score = float(score_s)
            except ValueError:
                raise EvalError(f"{path}: line {lineno}: bad rank or score") from None
            if rank != last_rank.get(qid, 0) + 1:
                raise EvalError(f"{path}: line {lineno}: rank gap for query {qid} "
                                f"(got {rank}, expected {last_rank.get(qid, 0) + 1})")
            if qid in last_score and score > last_score[qid]:
                raise EvalError(f"{path}: line {lineno}: scores increase for query {qid}")
            last_rank[qid] = rank
            last_score[qid] = score
            records.append(RunRecord(qid, pid, rank, score, tag))
    return records


def _gain(grade: int) -> float:
    return float(2 ** grade - 1)


def ndcg_at_k(ranking: list[str], qrels: Qrels, qid: str, k: int) -> float:
    """Normalized discounted cumulative gain at cutoff k.

    The ideal ranking orders all judged passages for the query by grade.
    Returns 0 when the query has no relevant passage.
    """
    if k < 1:
        raise EvalError("k must be >= 1")
    dcg = 0.0
    for r, pid in enumerate(ranking[:k], 1):
        dcg += _gain(qrels.grade(qid, pid)) / math.log2(r + 1)
    ideal = sorted(qrels.judged_for(qid).values(), reverse=True)
    idcg = 0.0
    for r, grade in enumerate(ideal[:k], 1):
        idcg += _gain(grade) / math.log2(r + 1)
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def err_at_k(ranking: list[str], qrels: Qrels, qid: str, k: int) -> float:
    """Expected reciprocal rank under the cascade model."""
    if k < 1:
        raise EvalError("k must be >= 1")
    if qrels.g_max < 1:
        return 0.0
    denom = float(2 ** qrels.g_max)
    err = 0.0
    not_stopped = 1.0
    for r, pid in enumerate(ranking[:k], 1):
        stop_p = _gain(qrels.grade(qid, pid)) / denom
        err += not_stopped * stop_p / r
        not_stopped *= 1.0 - stop_p
    return err


def ap_at_k(ranking: list[str], qrels: Qrels, qid: str, k: int,
            rel_threshold: int = 1) -> float:
    """Average precision at k over grades binarized at rel_threshold.

    The normalizer is the query's total number of relevant passages,
    capped at k; 0 when nothing relevant is judged.
    """
    if k < 1:
        raise EvalError("k must be >= 1")
    if rel_threshold < 1:
        raise EvalError("relevance threshold must be >= 1")
    total_rel = sum(1 for g in qrels.judged_for(qid).values() if g >= rel_threshold)
    denom = min(total_rel, k)
    if denom == 0:
        return 0.0
    hits = 0
    ap = 0.0
    for r, pid in enumerate(ranking[:k], 1):
        if qrels.grade(qid, pid) >= rel_threshold:
            hits += 1
            ap += hits / r
    return ap / denom


_METRIC_FNS = {"ndcg": ndcg_at_k, "err": err_at_k, "ap": ap_at_k}


def parse_metric(spec: str) -> tuple[str, int]:
    """Parse "ndcg@1000" into ("ndcg", 1000)."""
    name, _, k_s = spec.strip().lower().partition("@")
    if name not in _METRIC_FNS or not k_s.isdigit() or int(k_s) < 1:
        raise EvalError(f"bad metric spec {spec!r} (expected e.g. ndcg@1000, err@20, ap@5)")
    return name, int(k_s)


def _turn_of(qid: str) -> int:
    m = _QID_RE.match(qid)
    if not m:
        raise EvalError(f"query id {qid!r} is not of the form <topic>_<turn>")
    return int(m.group(2))


def turnwise_report(run: list[RunRecord], qrels: Qrels,
                    metrics: list[str]) -> tuple[list[str], list[tuple[str, list[float]]]]:
    """Per-turn metric means plus an "All" row.

    Returns (column names, rows) where each row is (label, values); rows
    are ordered by turn number with "All" last.
    """
    rankings: dict[str, list[str]] = {}
    for r in run:
        rankings.setdefault(r.qid, []).append((r.rank, r.pid))
    for qid in rankings:
        rankings[qid] = [pid for _, pid in sorted(rankings[qid])]

    parsed = [parse_metric(m) for m in metrics]
    per_query: dict[str, list[float]] = {}
    for qid, ranking in rankings.items():
        per_query[qid] = [_METRIC_FNS[name](ranking, qrels, qid, k) for name, k in parsed]

    by_turn: dict[int, list[list[float]]] = {}
    for qid, values in per_query.items():
        by_turn.setdefault(_turn_of(qid), []).append(values)

    def mean_of(groups: list[list[float]]) -> list[float]:
        n = len(groups)
        return [sum(v[i] for v in groups) / n for i in range(len(parsed))]

    rows = [(f"Turn {t}", mean_of(vals)) for t, vals in sorted(by_turn.items())]
    if per_query:
        rows.append(("All", mean_of(list(per_query.values()))))
    columns = [f"{name}@{k}" for name, k in parsed]
    return columns, rows


def format_report(columns: list[str], rows: list[tuple[str, list[float]]]) -> str:
    """Pretty fixed-width text table."""
    label_w = max([len("")] + [len(label) for label, _ in rows])
    header = " ".join([" " * label_w] + [f"{c:>12}" for c in columns])
    lines = [header]
    for label, values in rows:
        lines.append(" ".join([f"{label:<{label_w}}"] + [f"{v:>12.4f}" for v in values]))
    return "\n".join(lines) + "\n"


def report_tsv(columns: list[str], rows: list[tuple[str, list[float]]]) -> str:
    lines = ["\t".join(["turn"] + columns)]
    for label, values in rows:
        lines.append("\t".join([label] + [f"{v:.6f}" for v in values]))
    return "\n".join(lines) + "\n"
