"""Retrievability and exposure-fairness analytics over TREC-style runs.

Pipeline: index a corpus, search it (or bring your own run file),
group the queries, score per-document retrievability inside each group,
and summarize inequality with per-group Gini coefficients.
"""

from .clustering import (
    CentroidSet,
    SparseVector,
    cluster_queries,
    kmeans,
    tfidf_vectorize,
)
from .engine import (
    InvertedIndex,
    bm25_search,
    build_index,
    generate_synthetic_queries,
    parse_corpus,
    search_all,
    tokenize,
)
from .fairness import gini, materialize, sweep_k, t_retrievability, write_sweep_csv
from .metrics import map_at_100, ndcg_at_10, write_metrics_csv
from .model import (
    POOLED,
    Bm25Params,
    ClusterAssignment,
    FairnessReport,
    FullCollection,
    GroupStats,
    PooledRetrieved,
    Qrels,
    Query,
    QuerySet,
    RankedList,
    ReportConfig,
    RetrievabilityTable,
    RunEntry,
    RunTable,
)
from .retrievability import (
    retrievability_global,
    retrievability_indicator,
    retrievability_local,
    write_scores,
)
from .trecio import (
    EmbeddingMatrix,
    ParseError,
    parse_clusters,
    parse_qrels,
    parse_queries,
    parse_run,
    read_embeddings,
    write_clusters,
    write_embeddings,
    write_qrels,
    write_queries,
    write_report,
    write_run,
)

__version__ = "0.1.0"

__all__ = [
    "Bm25Params",
    "CentroidSet",
    "ClusterAssignment",
    "EmbeddingMatrix",
    "FairnessReport",
    "FullCollection",
    "GroupStats",
    "InvertedIndex",
    "POOLED",
    "ParseError",
    "PooledRetrieved",
    "Qrels",
    "Query",
    "QuerySet",
    "RankedList",
    "ReportConfig",
    "RetrievabilityTable",
    "RunEntry",
    "RunTable",
    "SparseVector",
    "bm25_search",
    "build_index",
    "cluster_queries",
    "generate_synthetic_queries",
    "gini",
    "kmeans",
    "map_at_100",
    "materialize",
    "ndcg_at_10",
    "parse_clusters",
    "parse_corpus",
    "parse_qrels",
    "parse_queries",
    "parse_run",
    "read_embeddings",
    "retrievability_global",
    "retrievability_indicator",
    "retrievability_local",
    "search_all",
    "sweep_k",
    "t_retrievability",
    "tfidf_vectorize",
    "tokenize",
    "write_clusters",
    "write_embeddings",
    "write_metrics_csv",
    "write_qrels",
    "write_queries",
    "write_report",
    "write_run",
    "write_scores",
    "write_sweep_csv",
]
