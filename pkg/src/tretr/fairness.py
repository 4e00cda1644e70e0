"""Inequality of retrievability: per-group Gini coefficients and their
min/avg/max aggregation, plus the K-sweep that produces plot-ready CSV.
"""

from __future__ import annotations

import math

from typing import Sequence, TextIO

import numpy as np

from .clustering import cluster_queries
from .model import (
    FairnessReport,
    FullCollection,
    GroupStats,
    QuerySet,
    ReportConfig,
    RetrievabilityTable,
    RunTable,
)
from .retrievability import retrievability_local
from .trecio import EmbeddingMatrix


def gini(values: Sequence[float]) -> float:
    """Gini coefficient via the sorted rank-weight formula:
    G = (2 Σ i·x_(i)) / (n Σ x) − (n+1)/n, 1-based i, no small-sample
    correction. Requires non-negative values with a positive sum."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("gini requires a nonempty 1-d list of values")
    if not np.all(np.isfinite(x)):
        raise ValueError("gini requires finite values")
    if np.any(x < 0):
        raise ValueError("gini requires non-negative values")
    xs = np.sort(x)  # summing the sorted array makes G order-independent
    total = float(xs.sum())
    if total == 0.0:
        raise ValueError("degenerate distribution (sum is zero)")
    n = xs.size
    ranks = np.arange(1, n + 1, dtype=np.float64)
    g = 2.0 * float(ranks @ xs) / (n * total) - (n + 1) / n
    return max(g, 0.0)  # equality cases can land a hair below zero


def materialize(table: RetrievabilityTable) -> list[float]:
    """Scores as a bare distribution. A FullCollection universe pads the
    unretrieved remainder with zeros."""
    values = list(table.scores.values())
    if isinstance(table.universe, FullCollection):
        if table.universe.size < len(values):
            raise ValueError(
                f"{len(values)} scored docs exceed collection size {table.universe.size}"
            )
        values.extend([0.0] * (table.universe.size - len(values)))
    return values


def t_retrievability(
    tables: Sequence[RetrievabilityTable | None],
    config: ReportConfig | None = None,
) -> FairnessReport:
    """Per-group Gini for each table, aggregated as (min, avg, max) over
    the non-empty groups; avg is the plain mean, not query-weighted.
    A None entry or an empty score pool marks the group empty."""
    if not tables:
        raise ValueError("at least one group is required")
    per_group: list[GroupStats] = []
    ginis: list[float] = []
    for gid, table in enumerate(tables):
        if table is None:
            per_group.append(GroupStats(gid, 0, 0, None, empty=True))
            continue
        if not table.scores:
            per_group.append(GroupStats(gid, table.query_count, 0, None, empty=True))
            continue
        g = gini(materialize(table))
        ginis.append(g)
        per_group.append(GroupStats(gid, table.query_count, len(table.scores), g))
    if not ginis:
        raise ValueError("all groups are empty")
    lo, hi = min(ginis), max(ginis)
    # rounding can push the mean an ulp outside [min, max]; the true mean never is
    avg = min(max(math.fsum(ginis) / len(ginis), lo), hi)
    aggregates = (lo, avg, hi)
    return FairnessReport(
        k=len(tables),
        per_group=tuple(per_group),
        aggregates=aggregates,
        config=config or ReportConfig(),
    )


def sweep_k(
    run: RunTable,
    queries: QuerySet,
    representation: EmbeddingMatrix | str = "tfidf",
    k_values: Sequence[int] = (1,),
    seed: int = 0,
    depth: int = 100,
    log_base: str = "e",
) -> list[tuple[int, FairnessReport]]:
    """Cluster, localize, and aggregate once per k."""
    if not k_values:
        raise ValueError("k_values must be nonempty")
    for k in k_values:
        if not 1 <= k <= len(queries):
            raise ValueError(f"k={k} outside [1, {len(queries)}]")
    label = "tfidf" if isinstance(representation, str) else "dense"
    results: list[tuple[int, FairnessReport]] = []
    for k in k_values:
        clusters = cluster_queries(queries, representation, k=k, seed=seed)
        tables = retrievability_local(run, queries, clusters, depth=depth, log_base=log_base)
        config = ReportConfig(
            log_base=log_base,
            depth=depth,
            universe="pooled",
            clustering=f"kmeans(repr={label},k={k},seed={seed})",
        )
        results.append((k, t_retrievability(tables, config)))
    return results


def write_sweep_csv(results: Sequence[tuple[int, FairnessReport]], stream: TextIO) -> None:
    stream.write("k,min,avg,max\n")
    for k, report in results:
        stream.write(f"{k},{report.g_min:.6f},{report.g_avg:.6f},{report.g_max:.6f}\n")
