"""nDCG@10 and MAP@100 against graded qrels.

Only queries with at least one positive grade are evaluable; they enter
the per-query map and the mean even when the run never saw them (score
0). Means are accumulated in ascending query-id order.
"""

from __future__ import annotations

import math
from typing import TextIO

from .model import Qrels, RunTable


def _evaluable(qrels: Qrels) -> list[str]:
    counts = qrels.relevant_counts()
    if not counts:
        raise ValueError("no evaluable queries")
    return sorted(counts)


def ndcg_at_10(run: RunTable, qrels: Qrels) -> tuple[dict[str, float], float]:
    """Exponential gain (2^g - 1), discount log2(1+rank), ideal from the
    query's own grades sorted descending."""
    per_query: dict[str, float] = {}
    for qid in _evaluable(qrels):
        dcg = 0.0
        if qid in run.lists:
            for entry in run.lists[qid].entries[:10]:
                gain = (1 << qrels.grade(qid, entry.doc)) - 1
                dcg += gain / math.log2(1.0 + entry.rank)
        ideal = sorted(qrels.grades_for(qid), reverse=True)[:10]
        idcg = sum(((1 << g) - 1) / math.log2(2.0 + i) for i, g in enumerate(ideal))
        per_query[qid] = dcg / idcg
    mean = sum(per_query[qid] for qid in per_query) / len(per_query)
    return per_query, mean


def map_at_100(run: RunTable, qrels: Qrels) -> tuple[dict[str, float], float]:
    """AP = (sum of precision@k at relevant hits, k <= 100) / R with R the
    full relevant count from qrels, uncapped."""
    relevant = qrels.relevant_counts()
    per_query: dict[str, float] = {}
    for qid in _evaluable(qrels):
        precision_sum = 0.0
        hits = 0
        if qid in run.lists:
            for entry in run.lists[qid].entries:
                if entry.rank > 100:
                    break
                if qrels.grade(qid, entry.doc) > 0:
                    hits += 1
                    precision_sum += hits / entry.rank
        per_query[qid] = precision_sum / relevant[qid]
    mean = sum(per_query[qid] for qid in per_query) / len(per_query)
    return per_query, mean


def write_metrics_csv(
    ndcg: tuple[dict[str, float], float],
    ap: tuple[dict[str, float], float],
    stream: TextIO,
) -> None:
    """`qid,ndcg@10,map@100` rows in ascending query id, then a summary
    row labeled `all` carrying the means."""
    ndcg_per, ndcg_mean = ndcg
    ap_per, ap_mean = ap
    if sorted(ndcg_per) != sorted(ap_per):
        raise ValueError("metric tables cover different query sets")
    stream.write("qid,ndcg@10,map@100\n")
    for qid in sorted(ndcg_per):
        stream.write(f"{qid},{ndcg_per[qid]:.6f},{ap_per[qid]:.6f}\n")
    stream.write(f"all,{ndcg_mean:.6f},{ap_mean:.6f}\n")
