"""Parsers and writers for the on-disk artifacts.

Formats:
  run file    six whitespace-separated columns: ``qid Q0 docid rank score tag``
  qrels       four columns: ``qid 0 docid grade``
  queries     TSV: ``qid<TAB>text`` (text may be empty)
  clusters    CSV with header: ``qid,cluster``
  embeddings  ASCII header ``TRETR-EMB 1 <n> <dim>`` (optional trailing
              ``# comment``), then n newline-terminated UTF-8 ids, then
              n*dim little-endian float32 values, row-major
  report      single JSON document: keys k, per_group, aggregates, config

Writers emit a canonical byte stream: reading a written artifact and
writing it again reproduces the bytes exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import BinaryIO, Iterable, TextIO

import numpy as np

from .model import (
    ClusterAssignment,
    FairnessReport,
    Qrels,
    Query,
    QuerySet,
    RankedList,
    RunEntry,
    RunTable,
    check_id,
)


class ParseError(ValueError):
    """Malformed input; carries a 1-based line number when one applies."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# --- run files ---------------------------------------------------------


def parse_run(stream: Iterable[str], depth: int = 100) -> RunTable:
    """Parse a TREC run file, keeping at most `depth` ranks per query.

    Lines with rank > depth are dropped silently; everything else is
    validated strictly (column count, integer rank, finite score, no
    duplicate (qid, docid), contiguous ranks after sorting).
    """
    if depth < 1:
        raise ValueError(f"depth must be positive, got {depth}")
    rows: dict[str, list[tuple[int, str, float]]] = {}
    seen: set[tuple[str, str]] = set()
    tag = ""
    for lineno, line in enumerate(stream, 1):
        fields = line.split()
        if len(fields) != 6:
            raise ParseError(f"expected 6 columns, got {len(fields)}", lineno)
        qid, _, did, rank_s, score_s, line_tag = fields
        try:
            rank = int(rank_s)
        except ValueError:
            raise ParseError(f"non-integer rank {rank_s!r}", lineno) from None
        try:
            score = float(score_s)
        except ValueError:
            raise ParseError(f"non-numeric score {score_s!r}", lineno) from None
        if not math.isfinite(score):
            raise ParseError(f"non-finite score {score_s!r}", lineno)
        if (qid, did) in seen:
            raise ParseError(f"duplicate (query, doc) pair ({qid!r}, {did!r})", lineno)
        seen.add((qid, did))
        if not tag:
            tag = line_tag
        if rank > depth:
            continue
        rows.setdefault(qid, []).append((rank, did, score))

    lists: dict[str, RankedList] = {}
    for qid, entries in rows.items():
        entries.sort()
        for i, (rank, _, _) in enumerate(entries):
            if rank != i + 1:
                raise ParseError(
                    f"query {qid!r}: ranks are not contiguous from 1 (found {rank} "
                    f"at position {i + 1})"
                )
        lists[qid] = RankedList(
            qid, tuple(RunEntry(did, rank, score) for rank, did, score in entries)
        )
    return RunTable(tag=tag, lists=lists, depth=depth)


def write_run(run: RunTable, stream: TextIO) -> None:
    for qid, lst in run.lists.items():
        for entry in lst.entries:
            stream.write(f"{qid} Q0 {entry.doc} {entry.rank} {entry.score!r} {run.tag}\n")


# --- qrels -------------------------------------------------------------


def parse_qrels(stream: Iterable[str]) -> Qrels:
    grades: dict[tuple[str, str], int] = {}
    for lineno, line in enumerate(stream, 1):
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(f"expected 4 columns, got {len(fields)}", lineno)
        qid, _, did, grade_s = fields
        try:
            grade = int(grade_s)
        except ValueError:
            raise ParseError(f"non-integer grade {grade_s!r}", lineno) from None
        if grade < 0:
            raise ParseError(f"negative grade {grade}", lineno)
        if (qid, did) in grades:
            raise ParseError(f"duplicate judgment for ({qid!r}, {did!r})", lineno)
        grades[(qid, did)] = grade
    return Qrels(grades)


def write_qrels(qrels: Qrels, stream: TextIO) -> None:
    for (qid, did), grade in qrels.grades.items():
        stream.write(f"{qid} 0 {did} {grade}\n")


# --- query TSV ---------------------------------------------------------


def parse_queries(stream: Iterable[str]) -> QuerySet:
    entries: list[Query] = []
    seen: set[str] = set()
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if "\t" not in line:
            raise ParseError("expected qid<TAB>text", lineno)
        qid, text = line.split("\t", 1)
        try:
            check_id(qid, "query id")
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if qid in seen:
            raise ParseError(f"duplicate query id {qid!r}", lineno)
        seen.add(qid)
        entries.append(Query(qid, text))
    return QuerySet(tuple(entries))


def write_queries(queries: QuerySet, stream: TextIO) -> None:
    for q in queries:
        stream.write(f"{q.id}\t{q.text}\n")


# --- cluster CSV -------------------------------------------------------

_CLUSTER_HEADER = "qid,cluster"


def parse_clusters(stream: Iterable[str], k: int | None = None) -> ClusterAssignment:
    """Parse a ``qid,cluster`` CSV. With `k` given, ids must lie in [0, k);
    otherwise k is inferred as max id + 1."""
    it = iter(stream)
    try:
        header = next(it).rstrip("\n")
    except StopIteration:
        raise ParseError("missing header row") from None
    if header != _CLUSTER_HEADER:
        raise ParseError(f"expected header {_CLUSTER_HEADER!r}, got {header!r}", 1)
    assignment: dict[str, int] = {}
    for lineno, line in enumerate(it, 2):
        line = line.rstrip("\n")
        if "," not in line:
            raise ParseError("expected qid,cluster", lineno)
        qid, gid_s = line.rsplit(",", 1)
        try:
            check_id(qid, "query id")
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        try:
            gid = int(gid_s)
        except ValueError:
            raise ParseError(f"non-integer cluster id {gid_s!r}", lineno) from None
        if gid < 0:
            raise ParseError(f"negative cluster id {gid}", lineno)
        if k is not None and gid >= k:
            raise ParseError(f"cluster id {gid} outside [0, {k})", lineno)
        if qid in assignment:
            raise ParseError(f"duplicate query id {qid!r}", lineno)
        assignment[qid] = gid
    if not assignment:
        raise ParseError("no assignments")
    return ClusterAssignment(k=k if k is not None else max(assignment.values()) + 1,
                             assignment=assignment)


def write_clusters(clusters: ClusterAssignment, stream: TextIO) -> None:
    stream.write(_CLUSTER_HEADER + "\n")
    for qid, gid in clusters.assignment.items():
        stream.write(f"{qid},{gid}\n")


# --- embedding matrices ------------------------------------------------

_EMB_MAGIC = "TRETR-EMB"
_EMB_VERSION = "1"


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Row-major float32 matrix with one row per query id."""

    ids: tuple[str, ...]
    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"data must be 2-d, got shape {arr.shape}")
        if arr.shape[0] != len(self.ids):
            raise ValueError(f"{len(self.ids)} ids but {arr.shape[0]} rows")
        if arr.shape[1] < 1:
            raise ValueError("dim must be at least 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding matrix contains NaN or Inf")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate ids in embedding matrix")
        for i in self.ids:
            check_id(i, "query id")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingMatrix):
            return NotImplemented
        return self.ids == other.ids and np.array_equal(self.data, other.data)


def read_embeddings(stream: BinaryIO) -> EmbeddingMatrix:
    data = stream.read()
    nl = data.find(b"\n")
    if nl < 0:
        raise ParseError("missing header line")
    try:
        header = data[:nl].decode("ascii")
    except UnicodeDecodeError:
        raise ParseError("header is not ASCII") from None
    tokens = header.split()
    if len(tokens) < 4 or tokens[0] != _EMB_MAGIC or tokens[1] != _EMB_VERSION:
        raise ParseError(f"magic/version mismatch in header {header!r}")
    if len(tokens) > 4 and not tokens[4].startswith("#"):
        raise ParseError(f"unexpected header field {tokens[4]!r}")
    try:
        n, dim = int(tokens[2]), int(tokens[3])
    except ValueError:
        raise ParseError(f"non-integer dimensions in header {header!r}") from None
    if n < 0 or dim < 1:
        raise ParseError(f"invalid dimensions n={n} dim={dim}")

    pos = nl + 1
    ids: list[str] = []
    for row in range(n):
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise ParseError(f"truncated id block: {row} of {n} ids read")
        try:
            ids.append(data[pos:nl].decode("utf-8"))
        except UnicodeDecodeError:
            raise ParseError(f"id {row} is not valid UTF-8") from None
        pos = nl + 1

    payload = data[pos:]
    expected = n * dim * 4
    if len(payload) != expected:
        raise ParseError(f"payload is {len(payload)} bytes, expected {expected}")
    matrix = np.frombuffer(payload, dtype="<f4").reshape(n, dim).copy()
    if not np.all(np.isfinite(matrix)):
        raise ParseError("embedding payload contains NaN or Inf")
    return EmbeddingMatrix(tuple(ids), matrix)


def write_embeddings(m: EmbeddingMatrix, stream: BinaryIO, comment: str | None = None) -> None:
    header = f"{_EMB_MAGIC} {_EMB_VERSION} {m.n} {m.dim}"
    if comment is not None:
        header += f" # {comment}"
    stream.write(header.encode("ascii") + b"\n")
    for i in m.ids:
        stream.write(i.encode("utf-8") + b"\n")
    stream.write(np.ascontiguousarray(m.data, dtype="<f4").tobytes())


# --- fairness report JSON ----------------------------------------------


def _round6(x: float) -> float:
    return round(x, 6)


def write_report(report: FairnessReport, stream: TextIO) -> None:
    """Serialize a FairnessReport as JSON with 6-decimal numbers and
    per_group ordered by ascending group id."""
    doc = {
        "k": report.k,
        "per_group": [
            {
                "group": g.group,
                "query_count": g.query_count,
                "pooled_doc_count": g.pooled_doc_count,
                "gini": None if g.gini is None else _round6(g.gini),
                "empty": g.empty,
            }
            for g in report.per_group
        ],
        "aggregates": {
            "min": _round6(report.g_min),
            "avg": _round6(report.g_avg),
            "max": _round6(report.g_max),
        },
        "config": {
            "log_base": report.config.log_base,
            "depth": report.config.depth,
            "universe": report.config.universe,
            "clustering": report.config.clustering,
        },
    }
    json.dump(doc, stream, indent=2)
    stream.write("\n")
