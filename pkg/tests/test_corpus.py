import json

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from convqa.corpus import CorpusError, dump_jsonl, ingest, open_store

from helpers import make_store


def test_tsv_basic(tmp_path):
    store = make_store(tmp_path, [("p1", "hello world.")])
    p = store.get("p1")
    assert p.id == "p1"
    assert [t.norm for t in p.display_tokens] == ["hello", "world"]


def test_three_lines(tmp_path):
    store = make_store(tmp_path, [("p1", "aa"), ("p2", "bb"), ("p3", "cc")])
    assert store.doc_count == 3


def test_jsonl_empty_text_rejected(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text('{"id": "a", "text": ""}\n', encoding="utf-8")
    with pytest.raises(CorpusError, match="empty text"):
        ingest(src, tmp_path / "store", fmt="jsonl")


def test_duplicate_id_named(tmp_path):
    src = tmp_path / "in.tsv"
    src.write_text("p1\taa\np1\tbb\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="p1"):
        ingest(src, tmp_path / "store", fmt="tsv")


def test_malformed_line_number(tmp_path):
    src = tmp_path / "in.tsv"
    src.write_text("p1\taa\nno-tab-here\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="line 2"):
        ingest(src, tmp_path / "store", fmt="tsv")


def test_get_round_trip(tmp_path):
    store = make_store(tmp_path, [("p1", "the batman movies. great ones.")])
    reopened = open_store(str(tmp_path / "corpus"))
    p = reopened.get("p1")
    assert p.text == "the batman movies. great ones."
    assert len(p.sentences) == 2
    # scoring tokens drop stopwords but keep sentence assignment
    assert [t.norm for t in p.tokens] == ["batman", "movies", "great", "ones"]
    assert p.token_sentence == [0, 0, 1, 1]


def test_get_missing(tmp_path):
    store = make_store(tmp_path, [("p1", "aa")])
    with pytest.raises(CorpusError, match="not found"):
        store.get("missing")


def test_stats_empty(tmp_path):
    src = tmp_path / "in.tsv"
    src.write_text("", encoding="utf-8")
    store = ingest(src, tmp_path / "store", fmt="tsv")
    assert store.stats() == (0, 0, 0.0)


def test_stats_counts_scoring_tokens(tmp_path):
    store = make_store(tmp_path, [("p1", "the batman movies"), ("p2", "harvey dent")])
    docs, toks, avg = store.stats()
    assert (docs, toks) == (2, 4)
    assert avg == pytest.approx(2.0)


def test_open_rejects_garbage(tmp_path):
    bad = tmp_path / "bad"
    bad.write_bytes(b"not a store at all")
    (tmp_path / "bad.idx").write_bytes(b"nope")
    with pytest.raises(CorpusError):
        open_store(bad)


def test_dump_jsonl(tmp_path, capsys):
    import io

    store = make_store(tmp_path, [("p1", "aa bb"), ("p2", "cc")])
    buf = io.StringIO()
    dump_jsonl(store, buf)
    lines = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert lines == [{"id": "p1", "text": "aa bb"}, {"id": "p2", "text": "cc"}]


_ids = st.lists(st.text(alphabet="abcdefgh0123456789_", min_size=1, max_size=12),
                min_size=1, max_size=8, unique=True)
_texts = st.text(min_size=1, max_size=80).filter(lambda s: s.strip())


@settings(max_examples=30, deadline=None)
@given(ids=_ids, data=st.data())
def test_round_trip_property(tmp_path_factory, ids, data):
    tmp = tmp_path_factory.mktemp("rt")
    rows = [(pid, data.draw(_texts)) for pid in ids]
    src = tmp / "in.jsonl"
    with open(src, "w", encoding="utf-8") as f:
        for pid, text in rows:
            f.write(json.dumps({"id": pid, "text": text}) + "\n")
    ingest(src, tmp / "store", fmt="jsonl")
    reopened = open_store(tmp / "store")
    assert reopened.doc_count == len(rows)
    for pid, text in rows:
        assert reopened.get(pid).text == text
