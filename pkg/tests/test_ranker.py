import dataclasses
import random

import pytest

from convqa.conversation import CqItem, CqStrategy
from convqa.embeddings import load_embeddings
from convqa.ranker import (
    ParamError,
    RankerParams,
    preset,
    rank_candidates,
    score_edge,
    score_node,
    score_pos,
    score_prior,
)
from convqa.retrieval import Candidate, CandidateList, build_index, retrieve
from convqa.wpn import build_wpn, npmi

from helpers import make_store, random_corpus, random_conversation, random_embeddings_text
from oracles import (
    NaiveEmbeddings,
    NaiveWpn,
    formulate_cq_naive,
    pipeline_rank_naive,
    score_passage_naive,
)


def items(*tokens, weight=1.0, turn=1):
    return [CqItem(t, turn, weight) for t in tokens]


@pytest.fixture()
def tiny_emb(tmp_path):
    # qq/aa/bb nearly collinear; cc orthogonal; dd opposite
    f = tmp_path / "tiny_emb.txt"
    f.write_text(
        "5 3\n"
        "qq 1 0 0\n"
        "aa 0.99 0.141 0\n"
        "bb 0.97 0.243 0\n"
        "cc 0 1 0\n"
        "dd -1 0 0\n",
        encoding="utf-8",
    )
    return load_embeddings(f)


def passage_of(tmp_path, text, name="p"):
    store = make_store(tmp_path, [("p1", text)], name=name)
    return store.get("p1"), store


class TestScoreNode:
    def test_direct_match_scores_one(self, tmp_path, tiny_emb):
        p, _ = passage_of(tmp_path, "nolan")
        score, matches = score_node(p, items("nolan"), tiny_emb, alpha=0.7)
        assert score == 1.0
        assert matches[0].query_token == "nolan"
        assert matches[0].similarity == 1.0

    def test_nothing_above_alpha(self, tmp_path, tiny_emb):
        p, _ = passage_of(tmp_path, "cc dd")
        score, matches = score_node(p, items("qq"), tiny_emb, alpha=0.7)
        assert score == 0.0
        assert matches == []

    def test_occurrences_each_contribute(self, tmp_path, tiny_emb):
        p, _ = passage_of(tmp_path, "qq qq qq")
        score, _ = score_node(p, items("qq"), tiny_emb, alpha=0.7)
        assert score == pytest.approx(3.0)

    def test_contribution_uses_weighted_max(self, tmp_path, tiny_emb):
        # argmax by similarity is "qq" (sim 1.0), but a weighted later item
        # can still own the contribution max
        p, _ = passage_of(tmp_path, "qq")
        cq = [CqItem("qq", 1, 0.4), CqItem("aa", 2, 1.0)]
        score, matches = score_node(p, cq, tiny_emb, alpha=0.7)
        sim_qq_aa = float(tiny_emb.vectors["qq"] @ tiny_emb.vectors["aa"])
        assert matches[0].query_token == "qq"
        assert score == pytest.approx(max(0.4, sim_qq_aa))

    def test_matches_oracle_on_fixture(self, tmp_path):
        rng = random.Random(21)
        emb_file = tmp_path / "emb.txt"
        vocab = [f"w{i:03d}" for i in range(20)]
        emb_file.write_text(random_embeddings_text(rng, vocab), encoding="utf-8")
        emb = load_embeddings(emb_file)
        naive_emb = NaiveEmbeddings(emb_file)
        p, _ = passage_of(tmp_path, "w001 w004 w007 w002 w001 w015 w011 w019")
        cq = [CqItem("w001", 1, 1.0), CqItem("w007", 1, 1.0), CqItem("w003", 2, 0.5)]
        got, _ = score_node(p, cq, emb, alpha=0.7)
        expected, _, _ = score_passage_naive(
            [t.norm for t in p.tokens], p.token_sentence, len(p.sentences),
            [(i.token, i.turn, i.weight) for i in cq],
            NaiveWpn([[t.norm for t in p.tokens]], 3), naive_emb, 0.7, 0.0, 3)
        assert got == pytest.approx(expected, abs=1e-12)


class TestScoreEdge:
    def test_qualifying_pair_contributes_npmi(self, tmp_path, tiny_emb):
        rows = [("p1", "harvey dent gotham"), ("p2", "harvey dent"), ("p3", "gotham news")]
        store = make_store(tmp_path, rows)
        graph = build_wpn(store, window=3)
        value = npmi(graph, "harvey", "dent")
        assert value is not None and value > 0
        p = store.get("p2")
        score, uses = score_edge(p, items("harvey", "dent"), graph, tiny_emb,
                                 alpha=0.7, beta=0.0, window=3)
        assert score == pytest.approx(value)
        assert [(u.word_a, u.word_b) for u in uses] == [("harvey", "dent")]

    def test_same_best_match_contributes_nothing(self, tmp_path, tiny_emb):
        # aa and bb both best-match the single query token qq
        rows = [("p1", "aa bb"), ("p2", "aa bb cc")]
        store = make_store(tmp_path, rows)
        graph = build_wpn(store, window=3)
        assert npmi(graph, "aa", "bb") is not None
        score, uses = score_edge(store.get("p1"), items("qq"), graph, tiny_emb,
                                 alpha=0.7, beta=0.0, window=3)
        assert score == 0.0 and uses == []

    def test_beta_gates_edges(self, tmp_path, tiny_emb):
        store = make_store(tmp_path, [("p1", "harvey dent"), ("p2", "harvey dent")])
        graph = build_wpn(store, window=3)
        value = npmi(graph, "harvey", "dent")
        p = store.get("p1")
        score, _ = score_edge(p, items("harvey", "dent"), graph, tiny_emb,
                              alpha=0.7, beta=value, window=3)
        assert score == 0.0  # strict >

    def test_matches_pair_enumeration_oracle(self, tmp_path):
        rng = random.Random(33)
        rc = random_corpus(rng, vocab_size=15, max_passages=8, sentences=True)
        store = make_store(tmp_path, rc.rows)
        graph = build_wpn(store, window=rc.window)
        emb_file = tmp_path / "emb.txt"
        emb_file.write_text(
            random_embeddings_text(rng, [f"w{i:03d}" for i in range(15)]), encoding="utf-8")
        emb = load_embeddings(emb_file)
        naive_emb = NaiveEmbeddings(emb_file)
        naive_graph = NaiveWpn(rc.token_lists, rc.window)
        turns = random_conversation(rng, [f"w{i:03d}" for i in range(15)])
        cq_t = formulate_cq_naive(turns, "cq3")
        cq = [CqItem(t, turn, w) for t, turn, w in cq_t]
        for pid, (toks, sent_of, n_sent) in rc.doc_views.items():
            p = store.get(pid)
            got, _ = score_edge(p, cq, graph, emb, alpha=0.7, beta=0.0, window=rc.window)
            _, expected, _ = score_passage_naive(
                toks, sent_of, n_sent, cq_t, naive_graph, naive_emb, 0.7, 0.0, rc.window)
            assert got == pytest.approx(expected, abs=1e-12)


class TestScorePos:
    def test_all_mass_in_first_sentence(self):
        assert score_pos([2.5, 0.0], [0.5, 0.0]) == pytest.approx(3.0)

    def test_second_sentence_halved(self):
        assert score_pos([0.0, 2.5], [0.0, 0.5]) == pytest.approx(1.5)

    def test_three_sentence_max(self):
        node = [1.0, 4.0, 3.0]
        edge = [0.5, 0.0, 3.0]
        # terms: 1.5/1, 4.0/2, 6.0/3
        assert score_pos(node, edge) == pytest.approx(2.0)

    def test_no_qualifying_tokens(self):
        assert score_pos([0.0, 0.0], [0.0, 0.0]) == 0.0


class TestScorePrior:
    @pytest.mark.parametrize("rank,expected", [(1, 1.0), (4, 0.25), (1000, 0.001)])
    def test_reciprocal(self, rank, expected):
        assert score_prior(rank) == expected

    def test_rank_below_one_rejected(self):
        with pytest.raises(ParamError):
            score_prior(0)


class TestPresets:
    def test_run1(self):
        p = preset("run1")
        assert (p.alpha, p.beta) == (0.7, 0.0)
        assert p.weights() == (0.6, 0.3, 0.1, 0.0)
        assert p.strategy is CqStrategy.CQ1 and not p.union

    def test_run2(self):
        p = preset("run2")
        assert p.weights() == (0.9, 0.1, 0.0, 0.0)
        assert (p.alpha, p.strategy, p.union) == (0.7, CqStrategy.CQ1, False)

    def test_run3(self):
        p = preset("run3")
        assert p.weights() == (0.0, 0.6, 0.4, 0.0)
        assert p.union and p.h1 == 0

    def test_run4(self):
        p = preset("run4")
        assert p.alpha == 0.85
        assert p.weights() == (0.6, 0.3, 0.1, 0.0)
        assert p.strategy is CqStrategy.CQ2

    def test_unknown(self):
        with pytest.raises(ParamError):
            preset("run9")


class TestParams:
    def test_weight_sum_enforced(self):
        with pytest.raises(ParamError, match="sum"):
            RankerParams(h1=0.5, h2=0.5, h3=0.5, h4=0.0).validate()

    def test_union_requires_zero_prior_weight(self):
        with pytest.raises(ParamError, match="h1"):
            RankerParams(union=True).validate()

    def test_ui_ranges(self):
        RankerParams(alpha=0.7, beta=0.05).validate_ui()
        with pytest.raises(ParamError):
            RankerParams(alpha=0.4).validate_ui()
        with pytest.raises(ParamError):
            RankerParams(beta=0.2).validate_ui()


class TestRank:
    def _artifacts(self, tmp_path, texts):
        store = make_store(tmp_path, [(f"P{i:03d}", t) for i, t in enumerate(texts)])
        return store, build_index(store), build_wpn(store, window=3)

    def test_prior_only_keeps_baseline_order(self, tmp_path, tiny_emb):
        store, index, graph = self._artifacts(
            tmp_path, ["qq qq qq", "qq qq zz", "qq zz zz", "zz zz yy"])
        cq = items("qq")
        cands = retrieve(index, cq, k=10)
        params = RankerParams(h1=1.0, h2=0.0, h3=0.0, h4=0.0)
        ranked = rank_candidates(cands, cq, params, graph, tiny_emb, store)
        assert [r.pid for r in ranked] == cands.ids()
        assert ranked[0].total == pytest.approx(1.0)

    def test_node_only_finds_term(self, tmp_path, tiny_emb):
        store, index, graph = self._artifacts(
            tmp_path, ["yy zz", "yy harvey", "zz ww"])
        cq = items("harvey", "yy")
        cands = retrieve(index, cq, k=10)
        params = RankerParams(h1=0.0, h2=1.0, h3=0.0, h4=0.0)
        ranked = rank_candidates(cands, cq, params, graph, tiny_emb, store)
        assert ranked[0].pid == "P001"

    def test_run1_matches_pipeline_oracle(self, tmp_path):
        rng = random.Random(55)
        rc = random_corpus(rng, vocab_size=25, max_passages=10, sentences=True)
        store = make_store(tmp_path, rc.rows)
        index = build_index(store)
        graph = build_wpn(store, window=3)
        emb_file = tmp_path / "emb.txt"
        emb_file.write_text(
            random_embeddings_text(rng, [f"w{i:03d}" for i in range(25)]), encoding="utf-8")
        emb = load_embeddings(emb_file)
        turns = random_conversation(rng, [f"w{i:03d}" for i in range(25)])
        params = preset("run1")
        cq_t = formulate_cq_naive(turns, "cq1")
        cq = [CqItem(t, turn, w) for t, turn, w in cq_t]
        cands = retrieve(index, cq, k=params.pool_k)
        ranked = rank_candidates(cands, cq, params, graph, emb, store)
        expected = pipeline_rank_naive(
            rc.doc_views, turns, "cq1", False, NaiveWpn(rc.token_lists, 3),
            NaiveEmbeddings(emb_file), params.alpha, params.beta, params.window,
            params.pool_k, *params.weights())
        assert [r.pid for r in ranked] == expected

    def test_total_is_weighted_sum(self, tmp_path, tiny_emb):
        store, index, graph = self._artifacts(tmp_path, ["harvey dent. qq aa", "harvey qq"])
        cq = items("harvey", "qq")
        params = RankerParams(h1=0.4, h2=0.3, h3=0.2, h4=0.1)
        ranked = rank_candidates(retrieve(index, cq, k=10), cq, params, graph, tiny_emb, store)
        for r in ranked:
            expected = (0.4 * r.prior_score + 0.3 * r.node_score
                        + 0.2 * r.edge_score + 0.1 * r.pos_score)
            assert r.total == pytest.approx(expected, abs=1e-9)
            assert r.pos_score <= r.node_score + r.edge_score + 1e-12

    def test_weight_scaling_preserves_order(self, tmp_path, tiny_emb):
        store, index, graph = self._artifacts(
            tmp_path, ["qq aa bb", "aa bb cc", "qq cc", "bb qq aa"])
        cq = items("qq", "aa")
        cands = retrieve(index, cq, k=10)
        base = RankerParams(h1=0.4, h2=0.3, h3=0.2, h4=0.1)
        ranked = rank_candidates(cands, cq, base, graph, tiny_emb, store)
        scaled = dataclasses.replace(base, h1=0.8, h2=0.6, h3=0.4, h4=0.2)
        object.__setattr__(scaled, "validate", lambda *a, **k: None)  # bypass sum check
        ranked2 = rank_candidates(cands, cq, scaled, graph, tiny_emb, store)
        assert [r.pid for r in ranked2] == [r.pid for r in ranked]
        for a, b in zip(ranked, ranked2):
            assert b.total == pytest.approx(2 * a.total, rel=1e-12)

    def test_union_candidates_require_h1_zero(self, tmp_path, tiny_emb):
        store, index, graph = self._artifacts(tmp_path, ["qq aa", "bb cc"])
        cands = CandidateList([Candidate("P000", 0.0, 1)], prior_usable=False)
        with pytest.raises(ParamError, match="h1"):
            rank_candidates(cands, items("qq"), RankerParams(), graph, tiny_emb, store)

    def test_determinism(self, tmp_path, tiny_emb):
        store, index, graph = self._artifacts(
            tmp_path, ["qq aa. bb qq", "aa bb cc qq", "qq cc"])
        cq = items("qq", "bb")
        cands = retrieve(index, cq, k=10)
        params = RankerParams(h1=0.25, h2=0.25, h3=0.25, h4=0.25)
        a = rank_candidates(cands, cq, params, graph, tiny_emb, store)
        b = rank_candidates(cands, cq, params, graph, tiny_emb, store)
        assert a == b

    def test_display_extras(self, tmp_path, tiny_emb):
        texts = ["harvey dent qq. aa bb harvey. dent qq aa. bb cc dent. qq harvey aa",
                 "harvey dent"]
        store, index, graph = self._artifacts(tmp_path, texts)
        cq = items("harvey", "dent", "qq", "aa")
        ranked = rank_candidates(retrieve(index, cq, k=10), cq,
                                 RankerParams(), graph, tiny_emb, store)
        big = next(r for r in ranked if r.pid == "P000")
        assert len(big.top_nodes) <= 5
        assert len(big.top_edges) <= 5
        contribs = [  # top_nodes ordered by contribution
            next(m for m in big.top_nodes if m[0] == w) for w in [n[0] for n in big.top_nodes]]
        assert contribs == big.top_nodes
        # 5 sentences -> ceil(5/3) = 2 highlighted
        assert len(big.highlight) == 2
        small = next(r for r in ranked if r.pid == "P001")
        assert len(small.highlight) == 1


class TestThresholdMonotonicity:
    def test_random_draws(self, tmp_path):
        rng = random.Random(77)
        rc = random_corpus(rng, vocab_size=20, max_passages=8, sentences=True)
        store = make_store(tmp_path, rc.rows)
        graph = build_wpn(store, window=3)
        emb_file = tmp_path / "emb.txt"
        emb_file.write_text(
            random_embeddings_text(rng, [f"w{i:03d}" for i in range(20)]), encoding="utf-8")
        emb = load_embeddings(emb_file)
        vocab = [f"w{i:03d}" for i in range(20)]
        for _ in range(50):
            pid = rng.choice(list(rc.doc_views))
            p = store.get(pid)
            cq = items(*[rng.choice(vocab) for _ in range(3)])
            a1 = rng.uniform(0.0, 0.95)
            a2 = rng.uniform(a1, 1.0)
            n1, _ = score_node(p, cq, emb, alpha=a1)
            n2, _ = score_node(p, cq, emb, alpha=a2)
            assert n2 <= n1 + 1e-12
            b1 = rng.uniform(0.0, 0.5)
            b2 = rng.uniform(b1, 1.0)
            e_a1, _ = score_edge(p, cq, graph, emb, alpha=a1, beta=b1, window=3)
            e_a2, _ = score_edge(p, cq, graph, emb, alpha=a2, beta=b1, window=3)
            e_b2, _ = score_edge(p, cq, graph, emb, alpha=a1, beta=b2, window=3)
            assert e_a2 <= e_a1 + 1e-12
            assert e_b2 <= e_a1 + 1e-12
