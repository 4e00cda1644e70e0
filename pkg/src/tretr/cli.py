"""Pipeline subcommands. Exit codes: 0 success, 1 usage error, 2 data
error (malformed or missing input files, contract violations).

Outputs go only to paths named by --out/--out-dir; diagnostics go to
stderr. Identical invocations produce byte-identical outputs, and
--threads never changes bytes, only wall time.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import clustering, engine, fairness, metrics, retrievability, trecio
from .model import POOLED, Bm25Params, FullCollection, ReportConfig, Universe


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would sys.exit(2)
        raise _UsageError(f"{self.prog}: {message}")


def _universe_arg(text: str) -> Universe:
    if text == "pooled":
        return POOLED
    if text.startswith("collection:"):
        try:
            return FullCollection(int(text.split(":", 1)[1]))
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(
        f"expected 'pooled' or 'collection:<N>', got {text!r}"
    )


def _mode_arg(text: str) -> tuple[str, int | None]:
    if text == "reciprocal-log":
        return ("reciprocal-log", None)
    if text.startswith("indicator:"):
        try:
            return ("indicator", int(text.split(":", 1)[1]))
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(
        f"expected 'reciprocal-log' or 'indicator:<c>', got {text!r}"
    )


def _init_arg(text: str) -> str | tuple[str, str]:
    if text == "plusplus":
        return text
    if text.startswith("explicit:"):
        path = text.split(":", 1)[1]
        if path:
            return ("explicit", path)
    raise argparse.ArgumentTypeError(
        f"expected 'plusplus' or 'explicit:<file>', got {text!r}"
    )


def _k_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("at least one k is required")
    return values


def _read_queries(path: str):
    with open(path, encoding="utf-8") as fh:
        return trecio.parse_queries(fh)


def _read_run(path: str, depth: int = 100):
    with open(path, encoding="utf-8") as fh:
        return trecio.parse_run(fh, depth=depth)


def _resolve_init(spec: str | tuple[str, str]) -> str | list[int]:
    if spec == "plusplus":
        return "plusplus"
    _, path = spec
    with open(path, encoding="utf-8") as fh:
        tokens = fh.read().split()
    try:
        return [int(tok) for tok in tokens]
    except ValueError:
        raise ValueError(f"explicit init file {path!r} must contain integers only")


def _cmd_index(args: argparse.Namespace) -> int:
    with open(args.corpus, encoding="utf-8") as fh:
        docs = engine.parse_corpus(fh)
    index = engine.build_index(docs)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        engine.save_index(index, fh)
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    with open(args.index, encoding="utf-8") as fh:
        index = engine.load_index(fh)
    queries = _read_queries(args.queries)
    run = engine.search_all(
        index,
        queries,
        Bm25Params(k1=args.k1, b=args.b),
        depth=args.depth,
        tag=args.tag,
        threads=args.threads,
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        trecio.write_run(run, fh)
    return 0


def _cmd_synth_queries(args: argparse.Namespace) -> int:
    with open(args.index, encoding="utf-8") as fh:
        index = engine.load_index(fh)
    queries = engine.generate_synthetic_queries(
        index, args.count, args.bigram_fraction, args.seed
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        trecio.write_queries(queries, fh)
    return 0


def _cmd_vectorize(args: argparse.Namespace) -> int:
    queries = _read_queries(args.queries)
    vocab, vectors = clustering.tfidf_vectorize(queries)
    matrix = trecio.EmbeddingMatrix(
        ids=tuple(q.id for q in queries),
        data=clustering.densify(vectors, max(len(vocab), 1)),
    )
    with open(args.out, "wb") as fh:
        trecio.write_embeddings(matrix, fh, comment="tfidf")
    return 0


def _load_representation(args: argparse.Namespace):
    if args.repr == "tfidf":
        return "tfidf"
    if not args.embeddings:
        raise _UsageError(f"{args.prog}: --repr dense requires --embeddings")
    with open(args.embeddings, "rb") as fh:
        return trecio.read_embeddings(fh)


def _cmd_cluster(args: argparse.Namespace) -> int:
    queries = _read_queries(args.queries)
    representation = _load_representation(args)
    assignment = clustering.cluster_queries(
        queries,
        representation,
        k=args.k,
        seed=args.seed,
        init=_resolve_init(args.init),
        max_iter=args.max_iter,
        tol=args.tol,
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        trecio.write_clusters(assignment, fh)
    return 0


def _cmd_retrievability(args: argparse.Namespace) -> int:
    run = _read_run(args.run, depth=max(args.depth, 100))
    queries = _read_queries(args.queries)
    mode, c = args.mode
    if mode == "indicator":
        table = retrievability.retrievability_indicator(
            run, queries, c, universe=args.universe
        )
    else:
        table = retrievability.retrievability_global(
            run, queries, depth=args.depth, log_base=args.log_base, universe=args.universe
        )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        retrievability.write_scores(table, fh)
    return 0


def _cmd_gini(args: argparse.Namespace) -> int:
    with open(args.scores, encoding="utf-8") as fh:
        scores = retrievability.read_scores(fh)
    value = fairness.gini(list(scores.values()))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{value!r}\n")
    else:
        print(repr(value))
    return 0


def _cmd_treport(args: argparse.Namespace) -> int:
    run = _read_run(args.run, depth=max(args.depth, 100))
    queries = _read_queries(args.queries)
    with open(args.clusters, encoding="utf-8") as fh:
        clusters = trecio.parse_clusters(fh)
    tables = retrievability.retrievability_local(
        run, queries, clusters, depth=args.depth, log_base=args.log_base
    )
    report = fairness.t_retrievability(
        tables,
        ReportConfig(
            log_base=args.log_base,
            depth=args.depth,
            universe="pooled",
            clustering=f"file:{args.clusters}",
        ),
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        trecio.write_report(report, fh)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    run = _read_run(args.run, depth=max(args.depth, 100))
    queries = _read_queries(args.queries)
    representation = _load_representation(args)
    results = fairness.sweep_k(
        run,
        queries,
        representation,
        k_values=args.k,
        seed=args.seed,
        depth=args.depth,
        log_base=args.log_base,
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fairness.write_sweep_csv(results, fh)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for k, report in results:
            path = os.path.join(args.out_dir, f"report-k{k}.json")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                trecio.write_report(report, fh)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    run = _read_run(args.run)
    with open(args.qrels, encoding="utf-8") as fh:
        qrels = trecio.parse_qrels(fh)
    ndcg = metrics.ndcg_at_10(run, qrels)
    ap = metrics.map_at_100(run, qrels)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        metrics.write_metrics_csv(ndcg, ap, fh)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="tretr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a BM25 index from a docid<TAB>text TSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("search", help="run queries against an index, emit a TREC run")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--tag", default="bm25")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("synth-queries", help="sample unigram/bigram queries from an index")
    p.add_argument("--index", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--bigram-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth_queries)

    p = sub.add_parser("vectorize", help="write TF-IDF query vectors as an embedding matrix")
    p.add_argument("--queries", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_vectorize)

    p = sub.add_parser("cluster", help="k-means over TF-IDF or dense query vectors")
    p.add_argument("--queries", required=True)
    p.add_argument("--repr", choices=["tfidf", "dense"], default="tfidf")
    p.add_argument("--embeddings")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--init", type=_init_arg, default="plusplus")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("retrievability", help="per-document retrievability scores CSV")
    p.add_argument("--run", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--log-base", choices=["e", "2", "10"], default="e")
    p.add_argument("--universe", type=_universe_arg, default=POOLED)
    p.add_argument("--mode", type=_mode_arg, default=("reciprocal-log", None))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_retrievability)

    p = sub.add_parser("gini", help="Gini coefficient of a scores CSV")
    p.add_argument("--scores", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gini)

    p = sub.add_parser("treport", help="per-group Gini report for a given clustering")
    p.add_argument("--run", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--clusters", required=True)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--log-base", choices=["e", "2", "10"], default="e")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_treport)

    p = sub.add_parser("sweep", help="cluster + report across several k, emit k,min,avg,max")
    p.add_argument("--run", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--repr", choices=["tfidf", "dense"], default="tfidf")
    p.add_argument("--embeddings")
    p.add_argument("--k", type=_k_list, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--log-base", choices=["e", "2", "10"], default="e")
    p.add_argument("--out", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("eval", help="nDCG@10 and MAP@100 against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    return parser


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    args.prog = parser.prog
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run_cli()


if __name__ == "__main__":
    sys.exit(main())
