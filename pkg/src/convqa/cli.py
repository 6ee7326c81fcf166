"""Command-line entry point.

Commands: ingest, build-index, build-wpn, answer, trec-run, eval, serve,
plus the debug commands dump, wpn-export and index-stats. Exit codes:
0 success, 1 runtime error, 2 usage error (including missing input files).

Parameters resolve with precedence flags > config file > defaults; the
config file is plain "key = value" lines (#-comments allowed) accepting
the same keys as the flags plus artifact paths.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import corpus as corpus_mod
from . import evaluation as eval_mod
from . import retrieval as retrieval_mod
from . import wpn as wpn_mod
from .conversation import ConversationError, ConversationState, CqStrategy, load_topics
from .embeddings import EmbeddingError
from .pipeline import ArtifactPaths, Engine, render_result
from .ranker import ParamError, RankerParams, preset
from .evaluation import RunRecord

USAGE_ERROR = 2
RUNTIME_ERROR = 1

_PARAM_KEYS = {
    "alpha": float, "beta": float, "window": int,
    "h1": float, "h2": float, "h3": float, "h4": float,
    "pool_k": int, "display_k": int,
}
_PATH_KEYS = ("corpus", "index", "wpn", "embeddings")


class CliError(Exception):
    def __init__(self, message: str, code: int = RUNTIME_ERROR):
        super().__init__(message)
        self.code = code


def read_config(path) -> dict[str, str]:
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}", USAGE_ERROR)
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def resolve_params(args) -> RankerParams:
    """defaults < preset < config file < flags."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}

    preset_name = getattr(args, "preset", None) or cfg.get("preset")
    params = preset(preset_name) if preset_name else RankerParams()

    updates = {}
    for key, cast in _PARAM_KEYS.items():
        if key in cfg:
            try:
                updates[key] = cast(cfg[key])
            except ValueError:
                raise CliError(f"config: bad value for {key}: {cfg[key]!r}") from None
    if "strategy" in cfg:
        updates["strategy"] = CqStrategy.parse(cfg["strategy"])
    if "mode" in cfg:
        updates["union"] = _parse_mode(cfg["mode"])

    for key in _PARAM_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    if getattr(args, "strategy", None):
        updates["strategy"] = CqStrategy.parse(args.strategy)
    if getattr(args, "mode", None):
        updates["union"] = _parse_mode(args.mode)

    params = dataclasses.replace(params, **updates)
    params.validate()
    return params


def _parse_mode(mode: str) -> bool:
    if mode not in ("single", "union"):
        raise CliError(f"mode must be 'single' or 'union', got {mode!r}")
    return mode == "union"


def resolve_paths(args) -> ArtifactPaths:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    paths = {}
    for key in _PATH_KEYS:
        value = getattr(args, key, None) or cfg.get(key)
        if not value:
            raise CliError(f"missing artifact path: --{key}", USAGE_ERROR)
        if not os.path.exists(value):
            raise CliError(f"{key} file not found: {value}", USAGE_ERROR)
        paths[key] = value
    return ArtifactPaths(**paths)


def _require_file(path, what: str) -> None:
    if not os.path.exists(path):
        raise CliError(f"{what} not found: {path}", USAGE_ERROR)


def cmd_ingest(args) -> int:
    _require_file(args.input, "input file")
    store = corpus_mod.ingest(args.input, args.out, fmt=args.format)
    docs, toks, avg = store.stats()
    print(f"{docs} passages ingested ({toks} scoring tokens, avg length {avg:.1f})")
    return 0


def cmd_build_index(args) -> int:
    _require_file(args.corpus, "corpus store")
    store = corpus_mod.open_store(args.corpus)
    index = retrieval_mod.build_index(store)
    retrieval_mod.save_index(index, args.out)
    print(f"indexed {index.N} passages, {index.vocab_size()} terms, "
          f"avg length {index.avg_len:.1f}")
    return 0


def cmd_build_wpn(args) -> int:
    _require_file(args.corpus, "corpus store")
    store = corpus_mod.open_store(args.corpus)
    graph = wpn_mod.build_wpn(store, window=args.window, min_cooc=args.min_cooc)
    wpn_mod.save_wpn(graph, args.out)
    print(f"graph: {graph.node_count()} nodes, {graph.edge_count()} edges, "
          f"window {graph.window}, {graph.total_pairs} pair observations")
    return 0


def _print_result(rank: int, rendered: dict) -> None:
    comp = rendered["components"]
    print(f"#{rank}  {rendered['id']}  total={rendered['total']:.6f}  "
          f"(prior={comp['prior']:.4f} node={comp['node']:.4f} "
          f"edge={comp['edge']:.4f} pos={comp['pos']:.4f})")
    if rendered["top_nodes"]:
        nodes = ", ".join(f"{n['word']}~{n['query_token']}:{n['similarity']:.2f}"
                          for n in rendered["top_nodes"])
        print(f"    nodes: {nodes}")
    if rendered["top_edges"]:
        edges = ", ".join(f"({e['words'][0]},{e['words'][1]}):{e['npmi']:.2f}"
                          for e in rendered["top_edges"])
        print(f"    edges: {edges}")
    text = rendered["text"]
    highlighted = set(rendered["highlight"])
    for si, (cs, ce) in enumerate(rendered["sentences"]):
        marker = ">>" if si in highlighted else "  "
        print(f"    {marker} {text[cs:ce]}")


def cmd_answer(args) -> int:
    params = resolve_params(args)
    engine = Engine.load(resolve_paths(args), params)
    state = ConversationState(engine.stopwords)
    print("ask a question; :clear-last :clear-all :params :quit")
    while True:
        try:
            line = input("? ").strip()
        except EOFError:
            return 0
        if not line:
            continue
        if line == ":quit":
            return 0
        if line == ":params":
            print(params)
            continue
        if line == ":clear-all":
            state.clear_all()
            print("history cleared")
            continue
        if line == ":clear-last":
            try:
                state.clear_last()
            except ConversationError as e:
                print(f"error: {e}")
                continue
            print(f"history now {len(state.turns)} turn(s)")
            continue
        try:
            state.append_turn(line)
            ranked, _, ms = engine.timed_answer([t.raw for t in state.turns], params)
        except ConversationError as e:
            print(f"error: {e}")
            continue
        print(f"turn {len(state.turns)}: {len(ranked)} candidates in {ms:.0f} ms")
        for i, scored in enumerate(ranked[:params.display_k], 1):
            _print_result(i, render_result(engine.corpus.get(scored.pid), scored))


def cmd_trec_run(args) -> int:
    _require_file(args.topics, "topics file")
    params = resolve_params(args)
    engine = Engine.load(resolve_paths(args), params)
    tag = args.tag or args.preset or "convqa"
    records = []
    for topic_no, turns in load_topics(args.topics):
        questions: list[str] = []
        for turn_no, utterance in turns:
            questions.append(utterance)
            ranked, _ = engine.answer(questions, params)
            qid = f"{topic_no}_{turn_no}"
            for r, scored in enumerate(ranked[:1000], 1):
                records.append(RunRecord(qid, scored.pid, r, scored.total, tag))
    eval_mod.write_run(records, args.out)
    queries = len({r.qid for r in records})
    print(f"wrote {len(records)} lines for {queries} queries to {args.out}")
    return 0


def cmd_eval(args) -> int:
    _require_file(args.run, "run file")
    _require_file(args.qrels, "qrels file")
    run = eval_mod.read_run(args.run)
    qrels = eval_mod.read_qrels(args.qrels)
    judged = set(qrels.qids())
    unjudged = sorted({r.qid for r in run} - judged)
    if unjudged:
        print(f"warning: {len(unjudged)} queries have no judgments: "
              f"{', '.join(unjudged)}", file=sys.stderr)
    metrics = [m for m in args.metrics.split(",") if m.strip()]
    columns, rows = eval_mod.turnwise_report(run, qrels, metrics)
    print(eval_mod.format_report(columns, rows), end="")
    out = args.out or (args.run + ".report.tsv")
    with open(out, "w", encoding="utf-8") as f:
        f.write(eval_mod.report_tsv(columns, rows))
    print(f"report written to {out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    params = resolve_params(args)
    engine = Engine.load(resolve_paths(args), params)
    uvicorn.run(create_app(engine), host=args.host, port=args.port, log_level="info")
    return 0


def cmd_dump(args) -> int:
    _require_file(args.corpus, "corpus store")
    corpus_mod.dump_jsonl(corpus_mod.open_store(args.corpus), sys.stdout)
    return 0


def cmd_wpn_export(args) -> int:
    _require_file(args.wpn, "graph file")
    wpn_mod.export_tsv(wpn_mod.load_wpn(args.wpn), sys.stdout)
    return 0


def cmd_index_stats(args) -> int:
    _require_file(args.index, "index file")
    index = retrieval_mod.load_index(args.index)
    print(f"passages: {index.N}")
    print(f"avg_len: {index.avg_len:.4f}")
    print(f"vocabulary: {index.vocab_size()}")
    return 0


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--preset", choices=["run1", "run2", "run3", "run4"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--window", type=int)
    for h in ("h1", "h2", "h3", "h4"):
        p.add_argument(f"--{h}", type=float)
    p.add_argument("--pool-k", dest="pool_k", type=int)
    p.add_argument("--display-k", dest="display_k", type=int)
    p.add_argument("--strategy", choices=["cq1", "cq2", "cq3"])
    p.add_argument("--mode", choices=["single", "union"])


def _add_artifact_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", help="corpus store path")
    p.add_argument("--index", help="inverted index path")
    p.add_argument("--wpn", help="word proximity network path")
    p.add_argument("--embeddings", help="word2vec text embeddings path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convqa",
        description="Conversational question answering over passage corpora.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a passage store from TSV/JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["tsv", "jsonl"], default="tsv")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("build-index", help="build the BM25 inverted index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build_index)

    p = sub.add_parser("build-wpn", help="build the word proximity network")
    p.add_argument("--corpus", required=True)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--min-cooc", dest="min_cooc", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build_wpn)

    p = sub.add_parser("answer", help="interactive conversational answering")
    _add_artifact_flags(p)
    _add_param_flags(p)
    p.set_defaults(fn=cmd_answer)

    p = sub.add_parser("trec-run", help="batch-answer a topics file into a run file")
    p.add_argument("--topics", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tag", help="run tag (defaults to the preset name)")
    _add_artifact_flags(p)
    _add_param_flags(p)
    p.set_defaults(fn=cmd_trec_run)

    p = sub.add_parser("eval", help="evaluate a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metrics", default="ap@5,ndcg@1000",
                   help="comma-separated, e.g. ap@5,ndcg@1000,err@20")
    p.add_argument("--out", help="TSV report path (default: <run>.report.tsv)")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("serve", help="run the JSON HTTP answering service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    _add_artifact_flags(p)
    _add_param_flags(p)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("dump", help="debug: dump a corpus store as JSONL")
    p.add_argument("--corpus", required=True)
    p.set_defaults(fn=cmd_dump)

    p = sub.add_parser("wpn-export", help="debug: dump graph edges as TSV")
    p.add_argument("--wpn", required=True)
    p.set_defaults(fn=cmd_wpn_export)

    p = sub.add_parser("index-stats", help="debug: print index statistics")
    p.add_argument("--index", required=True)
    p.set_defaults(fn=cmd_index_stats)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (corpus_mod.CorpusError, wpn_mod.WpnError, retrieval_mod.IndexError_,
            eval_mod.EvalError, ConversationError, ParamError, EmbeddingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return RUNTIME_ERROR
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename}", file=sys.stderr)
        return USAGE_ERROR
    except KeyboardInterrupt:
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
