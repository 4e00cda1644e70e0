"""Acceptance gate: one test per required property, tolerances pinned.

Run with -v for one pass/fail line per criterion. Everything here runs
on the bundled 300-doc corpus or on seeded synthetic data; nothing
needs the network or large collections.
"""

import io
import math
import random

import numpy as np
import pytest

from tretr import (
    ClusterAssignment,
    EmbeddingMatrix,
    Qrels,
    QuerySet,
    RankedList,
    RunEntry,
    RunTable,
    gini,
    kmeans,
    map_at_100,
    materialize,
    ndcg_at_10,
    parse_clusters,
    parse_run,
    read_embeddings,
    retrievability_global,
    retrievability_local,
    sweep_k,
    t_retrievability,
    write_clusters,
    write_embeddings,
    write_run,
    write_sweep_csv,
)


def run_from_docs(spec, depth=100):
    lists = {
        qid: RankedList(
            qid, tuple(RunEntry(d, i + 1, float(len(docs) - i)) for i, d in enumerate(docs))
        )
        for qid, docs in spec.items()
    }
    return RunTable(tag="fix", lists=lists, depth=depth)


class TestGiniOracle:
    """Sorted-formula Gini vs the O(n²) mean-absolute-difference form."""

    def test_gini_oracle_equivalence(self):
        rng = np.random.default_rng(42)
        for trial in range(1000):
            n = int(rng.integers(1, 201))
            x = rng.random(n) * float(rng.choice([1.0, 100.0, 1e5]))
            if trial % 3 == 0:  # sparse distributions stress the low tail
                x = x * (rng.random(n) < 0.5)
            if x.sum() == 0:
                x[0] = 1.0
            oracle = float(np.abs(x[:, None] - x[None, :]).sum()) / (
                2.0 * n * n * float(x.mean())
            )
            assert abs(gini(x) - oracle) <= 1e-12, f"trial {trial}, n={n}"
        assert gini([1, 1, 1, 1]) == 0.0
        assert gini([0, 0, 0, 1]) == 0.75
        assert gini([1, 2, 3, 4]) == 0.25
        print("PASS gini oracle equivalence (1000 vectors, 1e-12; fixed cases exact)")


class TestRetrievabilityOracle:
    """Scores recomputed naively from the serialized run file."""

    def test_retrievability_oracle(self, toy_run, toy_queries):
        table = retrievability_global(toy_run, toy_queries, depth=100)

        buf = io.StringIO()
        write_run(toy_run, buf)
        brute: dict[str, float] = {}
        per_rank_mass = 0.0
        for line in buf.getvalue().splitlines():
            qid, _, doc, rank_s, score_s, tag = line.split()
            rank = int(rank_s)
            if rank <= 100:
                brute[doc] = brute.get(doc, 0.0) + 1.0 / math.log(1.0 + rank)
                per_rank_mass += 1.0 / math.log(1.0 + rank)
        nq = len(toy_queries)

        assert set(brute) == set(table.scores)
        for doc, total in brute.items():
            assert abs(table.scores[doc] - total / nq) <= 1e-12, doc

        conservation_lhs = sum(table.scores.values()) * nq
        assert abs(conservation_lhs - per_rank_mass) <= 1e-9
        print("PASS retrievability oracle (brute force 1e-12; conservation 1e-9)")


class TestPartitionConsistency:
    """Sum of group-weighted local scores equals the global scores."""

    def test_partition_consistency(self, toy_run, toy_queries):
        qids = toy_queries.ids()
        nq = len(qids)
        global_table = retrievability_global(toy_run, toy_queries)
        rng = np.random.default_rng(7)
        partitions = {
            1: {qid: 0 for qid in qids},
            2: {qid: int(g) for qid, g in zip(qids, rng.integers(0, 2, nq))},
            7: {qid: int(g) for qid, g in zip(qids, rng.integers(0, 7, nq))},
            nq: {qid: i for i, qid in enumerate(qids)},
        }
        for k, assignment in partitions.items():
            clusters = ClusterAssignment(k=k, assignment=assignment)
            tables = retrievability_local(toy_run, toy_queries, clusters)
            merged: dict[str, float] = {}
            for table in tables:
                if table is None:
                    continue
                for doc, score in table.scores.items():
                    merged[doc] = merged.get(doc, 0.0) + score * table.query_count
            assert set(merged) == set(global_table.scores), f"K={k}"
            for doc, total in merged.items():
                assert abs(total - global_table.scores[doc] * nq) <= 1e-12, f"K={k} {doc}"
        print(f"PASS partition consistency (K in {{1, 2, 7, {nq}}}, 1e-12)")


class TestDegenerateK:
    """K=1 collapses to the global pooled Gini; K=|Q| with full-depth
    lists collapses to the reciprocal-log constant."""

    def test_degenerate_k_identities(self, toy_run, toy_queries):
        # K=1: exactly the pooled global Gini
        clusters = ClusterAssignment(k=1, assignment={qid: 0 for qid in toy_queries.ids()})
        tables = retrievability_local(toy_run, toy_queries, clusters)
        report = t_retrievability(tables)
        global_gini = gini(materialize(retrievability_global(toy_run, toy_queries)))
        assert report.g_min == global_gini
        assert report.g_avg == global_gini
        assert report.g_max == global_gini

        # K=|Q|, every query retrieving exactly 100 distinct documents
        spec = {f"s{i:02d}": [f"s{i:02d}-d{r:03d}" for r in range(100)] for i in range(25)}
        run = run_from_docs(spec)
        qs = QuerySet.from_pairs([(qid, "") for qid in spec])
        singleton = ClusterAssignment(
            k=25, assignment={qid: i for i, qid in enumerate(sorted(spec))}
        )
        tables = retrievability_local(run, qs, singleton)
        report = t_retrievability(tables)
        c = gini([1.0 / math.log(1.0 + i) for i in range(1, 101)])
        for value in report.aggregates:
            assert abs(value - c) <= 1e-12
        print("PASS degenerate-K identities (K=1 exact; K=|Q| vs constant, 1e-12)")


class TestReportInvariant:
    """min <= avg <= max across a sweep; identical seeds, identical bytes."""

    def test_report_invariant(self, toy_run, toy_queries):
        k_values = [1, 2, 5, 10, 20, 50]
        results = sweep_k(toy_run, toy_queries, "tfidf", k_values=k_values, seed=13)
        assert [k for k, _ in results] == k_values
        for k, report in results:
            assert report.g_min <= report.g_avg <= report.g_max, f"K={k}"

        again = sweep_k(toy_run, toy_queries, "tfidf", k_values=k_values, seed=13)
        first, second = io.StringIO(), io.StringIO()
        write_sweep_csv(results, first)
        write_sweep_csv(again, second)
        assert first.getvalue() == second.getvalue()
        print("PASS report invariant (sweep K in {1,2,5,10,20,50}; CSV bytes stable)")


class TestKmeansProperties:
    def test_kmeans_properties(self):
        # objective never increases, across several shapes and seeds
        rng = np.random.default_rng(3)
        for n, d, k, seed in [(80, 6, 5, 0), (50, 3, 7, 1), (120, 10, 12, 2)]:
            points = rng.random((n, d))
            assignment, centroids = kmeans(points, k=k, seed=seed)
            for earlier, later in zip(centroids.history, centroids.history[1:]):
                assert later <= earlier + 1e-12

            # converged labels point at the nearest centroid (ties: lowest id)
            x = points / np.linalg.norm(points, axis=1, keepdims=True)
            d2 = ((x[:, None, :] - centroids.centroids[None, :, :]) ** 2).sum(axis=2)
            nearest = d2.argmin(axis=1)
            labels = np.array([assignment.assignment[str(i)] for i in range(n)])
            assert np.array_equal(labels, nearest)

        # 4-point fixture vs exhaustive 2-partition search
        pts = np.array([[0, 0], [0, 0.1], [10, 10], [10, 10.1]], dtype=float)
        assignment, _ = kmeans(pts, k=2, init=[0, 2])
        labels = [assignment.assignment[str(i)] for i in range(4)]
        assert labels[0] == labels[1] and labels[2] == labels[3] and labels[0] != labels[2]

        normalized = pts[1:] / np.linalg.norm(pts[1:], axis=1, keepdims=True)
        best_sse, best_labels = math.inf, None
        for mask in range(2**3):
            parts = [(mask >> i) & 1 for i in range(3)]
            sse = 0.0
            for gid in (0, 1):
                members = normalized[[i for i in range(3) if parts[i] == gid]]
                if len(members):
                    sse += float(((members - members.mean(axis=0)) ** 2).sum())
            if sse < best_sse:
                best_sse, best_labels = sse, parts
        got = [labels[i] == labels[1] for i in range(1, 4)]
        want = [best_labels[i - 1] == best_labels[0] for i in range(1, 4)]
        assert got == want
        print("PASS k-means properties (monotone objective; nearest centroid; brute force)")


class TestMetricOracles:
    def test_metric_oracles(self):
        run = run_from_docs({"q1": ["A", "B"]})
        assert ndcg_at_10(run, Qrels({("q1", "A"): 1}))[0]["q1"] == 1.0
        assert map_at_100(run, Qrels({("q1", "A"): 1}))[0]["q1"] == 1.0

        run = run_from_docs({"q1": ["B", "A"]})
        assert ndcg_at_10(run, Qrels({("q1", "A"): 1}))[0]["q1"] == 1.0 / math.log2(3.0)
        assert map_at_100(run, Qrels({("q1", "A"): 1}))[0]["q1"] == 0.5

        run = run_from_docs({"q1": ["A", "x", "B"]})
        two = map_at_100(run, Qrels({("q1", "A"): 1, ("q1", "B"): 1}))[0]["q1"]
        assert two == (1.0 + 2.0 / 3.0) / 2.0

        with pytest.raises(ValueError, match="no evaluable queries"):
            ndcg_at_10(run_from_docs({"q1": ["A"]}), Qrels({("q1", "A"): 0}))

        # 1,000 randomized swaps: promoting a relevant doc never lowers a metric
        rng = random.Random(2024)
        performed = 0
        while performed < 1000:
            n = rng.randrange(5, 80)
            docs = [f"d{i}" for i in range(n)]
            rng.shuffle(docs)
            relevant = set(rng.sample(docs, rng.randrange(1, max(2, n // 3))))
            qrels = Qrels({("q1", d): 1 for d in relevant})
            nonrel_positions = [i for i, d in enumerate(docs) if d not in relevant]
            rel_positions = [i for i, d in enumerate(docs) if d in relevant]
            swaps = [(i, j) for i in nonrel_positions for j in rel_positions if i < j]
            if not swaps:
                continue
            i, j = swaps[rng.randrange(len(swaps))]
            before = run_from_docs({"q1": docs})
            swapped = list(docs)
            swapped[i], swapped[j] = swapped[j], swapped[i]
            after = run_from_docs({"q1": swapped})
            assert ndcg_at_10(after, qrels)[1] >= ndcg_at_10(before, qrels)[1] - 1e-15
            assert map_at_100(after, qrels)[1] >= map_at_100(before, qrels)[1] - 1e-15
            performed += 1
        print("PASS metric oracles (fixtures exact; 1000 rank-swap monotonicity checks)")


class TestIoRoundTrips:
    def test_io_round_trips(self, toy_run, toy_queries):
        first = io.StringIO()
        write_run(toy_run, first)
        second = io.StringIO()
        write_run(parse_run(io.StringIO(first.getvalue())), second)
        assert first.getvalue() == second.getvalue()

        clusters = ClusterAssignment(
            k=5, assignment={qid: i % 5 for i, qid in enumerate(toy_queries.ids())}
        )
        first = io.StringIO()
        write_clusters(clusters, first)
        second = io.StringIO()
        write_clusters(parse_clusters(io.StringIO(first.getvalue()), k=5), second)
        assert first.getvalue() == second.getvalue()

        rng = np.random.default_rng(6)
        matrix = EmbeddingMatrix(
            tuple(f"q{i}" for i in range(12)),
            rng.standard_normal((12, 8)).astype(np.float32),
        )
        first = io.BytesIO()
        write_embeddings(matrix, first, comment="fixture")
        second = io.BytesIO()
        write_embeddings(read_embeddings(io.BytesIO(first.getvalue())), second, comment="fixture")
        assert first.getvalue() == second.getvalue()
        print("PASS I/O round trips (runs, clusters, embeddings byte-identical)")
