"""Retrievability scoring over run tables.

The main form credits a document 1/log(1+rank) for each query that
retrieves it within the depth cutoff, averaged over the whole query set.
A query in the set with no run contributes zero everywhere but still
counts in the normalizer. The legacy form replaces the reciprocal log
with a top-c indicator.
"""

from __future__ import annotations

import math
from typing import Callable, TextIO

from .model import (
    POOLED,
    ClusterAssignment,
    PooledRetrieved,
    QuerySet,
    RetrievabilityTable,
    RunTable,
    Universe,
)

_LOGS: dict[str, Callable[[float], float]] = {
    "e": math.log,
    "2": math.log2,
    "10": math.log10,
}


def _log_fn(log_base: str) -> Callable[[float], float]:
    if log_base not in _LOGS:
        raise ValueError(f"log_base must be one of e, 2, 10, got {log_base!r}")
    return _LOGS[log_base]


def _check_coverage(run: RunTable, queries: QuerySet) -> None:
    for qid in run.query_ids():
        if qid not in queries:
            raise ValueError(f"run contains unknown query id {qid!r}")


def retrievability_global(
    run: RunTable,
    queries: QuerySet,
    depth: int = 100,
    log_base: str = "e",
    universe: Universe = POOLED,
) -> RetrievabilityTable:
    """r(D) = mean over the query set of 1/log(1+rank of D), counting 0
    where D is absent from a query's top-`depth`."""
    if depth < 1:
        raise ValueError(f"depth must be positive, got {depth}")
    log = _log_fn(log_base)
    _check_coverage(run, queries)
    totals: dict[str, float] = {}
    # per-query partials merged in ascending query-id order: bit-stable
    for qid in run.query_ids():
        for entry in run.lists[qid].entries:
            if entry.rank > depth:
                break
            totals[entry.doc] = totals.get(entry.doc, 0.0) + 1.0 / log(1.0 + entry.rank)
    nq = len(queries)
    scores = {doc: total / nq for doc, total in totals.items()}
    return RetrievabilityTable(scores=scores, query_count=nq, universe=universe)


def retrievability_local(
    run: RunTable,
    queries: QuerySet,
    clusters: ClusterAssignment,
    depth: int = 100,
    log_base: str = "e",
) -> list[RetrievabilityTable | None]:
    """One table per group, each normalized by its own query count and
    pooled over its own retrieved documents. A group with no queries
    yields None; downstream reporting flags it instead of failing."""
    _check_coverage(run, queries)
    assigned = set(clusters.assignment)
    for q in queries:
        if q.id not in assigned:
            raise ValueError(f"cluster assignment missing query id {q.id!r}")
    if assigned - {q.id for q in queries}:
        extra = sorted(assigned - {q.id for q in queries})[0]
        raise ValueError(f"cluster assignment names unknown query id {extra!r}")
    tables: list[RetrievabilityTable | None] = []
    for gid in range(clusters.k):
        member_ids = [q.id for q in queries if clusters.assignment[q.id] == gid]
        if not member_ids:
            tables.append(None)
            continue
        group_queries = QuerySet(tuple(q for q in queries if q.id in set(member_ids)))
        group_run = RunTable(
            tag=run.tag,
            lists={qid: run.lists[qid] for qid in member_ids if qid in run.lists},
            depth=run.depth,
        )
        tables.append(
            retrievability_global(
                group_run, group_queries, depth=depth, log_base=log_base, universe=POOLED
            )
        )
    return tables


def retrievability_indicator(
    run: RunTable,
    queries: QuerySet,
    c: int,
    universe: Universe = POOLED,
) -> RetrievabilityTable:
    """r(D) = fraction of queries retrieving D within the top c."""
    if c < 1:
        raise ValueError(f"c must be positive, got {c}")
    if c > run.depth:
        raise ValueError(f"c={c} exceeds the run depth ({run.depth})")
    _check_coverage(run, queries)
    totals: dict[str, float] = {}
    for qid in run.query_ids():
        for entry in run.lists[qid].entries:
            if entry.rank > c:
                break
            totals[entry.doc] = totals.get(entry.doc, 0.0) + 1.0
    nq = len(queries)
    scores = {doc: total / nq for doc, total in totals.items()}
    return RetrievabilityTable(scores=scores, query_count=nq, universe=universe)


def write_scores(table: RetrievabilityTable, stream: TextIO) -> None:
    """CSV dump, `docid,score`, sorted by doc id."""
    stream.write("docid,score\n")
    for doc, score in table.scores.items():
        stream.write(f"{doc},{score!r}\n")


def read_scores(stream) -> dict[str, float]:
    """Inverse of write_scores: doc id -> score, insertion order as read."""
    lines = iter(enumerate(stream, 1))
    try:
        _, header = next(lines)
    except StopIteration:
        raise ValueError("empty scores file") from None
    if header.rstrip("\n") != "docid,score":
        raise ValueError("scores file must start with header 'docid,score'")
    scores: dict[str, float] = {}
    for lineno, line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        doc, _, raw = line.rpartition(",")
        if not doc:
            raise ValueError(f"line {lineno}: expected 'docid,score'")
        if doc in scores:
            raise ValueError(f"line {lineno}: duplicate doc id {doc!r}")
        try:
            scores[doc] = float(raw)
        except ValueError:
            raise ValueError(f"line {lineno}: bad score {raw!r}") from None
    if not scores:
        raise ValueError("scores file has no rows")
    return scores
