"""Persistent passage store: append-only record file plus id→offset index.

Ingestion is single-pass and streaming; after the build the store is
immutable and safe for concurrent readers. Tokens and sentence spans are
re-derived deterministically from the stored text on access.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

from .textproc import SentenceSpan, Token, default_stopwords, split_sentences

__all__ = ["Passage", "CorpusStore", "CorpusError", "ingest", "open_store", "dump_jsonl"]

_RECORDS_MAGIC = b"CQAPSG"
_INDEX_MAGIC = b"CQAIDX"
_VERSION = 1


class CorpusError(Exception):
    pass


@dataclass
class Passage:
    """A stored passage with its derived token views.

    display_tokens is the full token sequence (stopwords included) used for
    highlighting; tokens is the stopword-filtered sequence all scoring is
    defined over. sentences spans display_tokens; token_sentence[i] gives
    the sentence index of scoring token i.
    """

    id: str
    text: str
    display_tokens: list[Token]
    tokens: list[Token]
    sentences: list[SentenceSpan]
    token_sentence: list[int]


def _derive(pid: str, text: str, stop: frozenset[str]) -> Passage:
    display, spans = split_sentences(text)
    sent_of = []
    for si, span in enumerate(spans):
        sent_of.extend([si] * (span.end - span.start))
    tokens = []
    token_sentence = []
    for tok, si in zip(display, sent_of):
        if tok.norm not in stop:
            tokens.append(tok)
            token_sentence.append(si)
    return Passage(pid, text, display, tokens, spans, token_sentence)


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise CorpusError(f"truncated store file while reading {what}")
    return data


def _check_header(f, magic: bytes, path) -> None:
    head = f.read(8)
    if len(head) != 8 or head[:6] != magic:
        raise CorpusError(f"{path}: not a recognized store file")
    (version,) = struct.unpack("<H", head[6:])
    if version != _VERSION:
        raise CorpusError(f"{path}: unsupported format version {version}")


class CorpusStore:
    """Read-only view over an ingested passage collection."""

    def __init__(self, records_path, offsets: dict[str, int], token_count: int,
                 stop: frozenset[str]):
        self._records_path = records_path
        self._offsets = offsets
        self._stop = stop
        self.doc_count = len(offsets)
        self.token_count = token_count

    def ids(self) -> list[str]:
        return list(self._offsets)

    def __contains__(self, pid: str) -> bool:
        return pid in self._offsets

    def get(self, pid: str) -> Passage:
        try:
            offset = self._offsets[pid]
        except KeyError:
            raise CorpusError(f"passage not found: {pid}") from None
        with open(self._records_path, "rb") as f:
            f.seek(offset)
            (id_len,) = struct.unpack("<I", _read_exact(f, 4, "id length"))
            rid = _read_exact(f, id_len, "id").decode("utf-8")
            (text_len,) = struct.unpack("<I", _read_exact(f, 4, "text length"))
            text = _read_exact(f, text_len, "text").decode("utf-8")
        return _derive(rid, text, self._stop)

    def stats(self) -> tuple[int, int, float]:
        """(doc_count, scoring token count, average passage length)."""
        if self.doc_count == 0:
            return (0, 0, 0.0)
        return (self.doc_count, self.token_count, self.token_count / self.doc_count)


def _iter_tsv(f):
    for lineno, line in enumerate(f, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t", 1)
        if len(parts) != 2:
            raise CorpusError(f"line {lineno}: expected 'id<TAB>text'")
        yield lineno, parts[0], parts[1]


def _iter_jsonl(f):
    for lineno, line in enumerate(f, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusError(f"line {lineno}: invalid JSON ({e.msg})") from None
        if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
            raise CorpusError(f"line {lineno}: record must have 'id' and 'text'")
        yield lineno, str(rec["id"]), str(rec["text"])


def ingest(source_path, out_path, fmt: str = "tsv",
           stop: frozenset[str] | None = None) -> CorpusStore:
    """Build a store at out_path (records) / out_path + '.idx' (index).

    fmt is 'tsv' (id<TAB>text) or 'jsonl' ({"id","text"}). Duplicate or
    empty ids/texts are rejected with the offending line number.
    """
    if fmt not in ("tsv", "jsonl"):
        raise CorpusError(f"unknown ingest format: {fmt}")
    stop = default_stopwords() if stop is None else stop
    reader = _iter_tsv if fmt == "tsv" else _iter_jsonl

    offsets: dict[str, int] = {}
    token_count = 0
    out_path = str(out_path)
    with open(source_path, encoding="utf-8") as src, open(out_path, "wb") as rec:
        rec.write(_RECORDS_MAGIC + struct.pack("<H", _VERSION))
        for lineno, pid, text in reader(src):
            if not pid:
                raise CorpusError(f"line {lineno}: empty id")
            if not text.strip():
                raise CorpusError(f"line {lineno}: empty text for id {pid!r}")
            if pid in offsets:
                raise CorpusError(f"line {lineno}: duplicate id {pid!r}")
            offsets[pid] = rec.tell()
            id_bytes = pid.encode("utf-8")
            text_bytes = text.encode("utf-8")
            rec.write(struct.pack("<I", len(id_bytes)) + id_bytes)
            rec.write(struct.pack("<I", len(text_bytes)) + text_bytes)
            token_count += len(_derive(pid, text, stop).tokens)

    with open(out_path + ".idx", "wb") as idx:
        idx.write(_INDEX_MAGIC + struct.pack("<H", _VERSION))
        idx.write(struct.pack("<QQ", len(offsets), token_count))
        for pid, offset in offsets.items():
            id_bytes = pid.encode("utf-8")
            idx.write(struct.pack("<I", len(id_bytes)) + id_bytes + struct.pack("<Q", offset))

    return CorpusStore(out_path, offsets, token_count, stop)


def open_store(path, stop: frozenset[str] | None = None) -> CorpusStore:
    """Open a previously ingested store."""
    stop = default_stopwords() if stop is None else stop
    path = str(path)
    with open(path, "rb") as f:
        _check_header(f, _RECORDS_MAGIC, path)
    offsets: dict[str, int] = {}
    with open(path + ".idx", "rb") as idx:
        _check_header(idx, _INDEX_MAGIC, path + ".idx")
        doc_count, token_count = struct.unpack("<QQ", _read_exact(idx, 16, "counts"))
        for _ in range(doc_count):
            (id_len,) = struct.unpack("<I", _read_exact(idx, 4, "id length"))
            pid = _read_exact(idx, id_len, "id").decode("utf-8")
            (offset,) = struct.unpack("<Q", _read_exact(idx, 8, "offset"))
            offsets[pid] = offset
    return CorpusStore(path, offsets, token_count, stop)


def dump_jsonl(store: CorpusStore, out) -> None:
    """Debug dump of a store as JSONL records."""
    for pid in store.ids():
        p = store.get(pid)
        out.write(json.dumps({"id": p.id, "text": p.text}, ensure_ascii=False) + "\n")
