"""Shared domain types. Pure data: construction validates, nothing mutates.

All mapping fields are stored with keys in ascending order, so iteration
(and therefore any serialization) is deterministic for equal inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

QueryId = str
DocId = str


def check_id(value: str, kind: str = "id") -> str:
    """Validate an opaque identifier: non-empty, no whitespace."""
    if not isinstance(value, str) or not value:
        raise ValueError(f"{kind} must be a non-empty string, got {value!r}")
    if any(ch.isspace() for ch in value):
        raise ValueError(f"{kind} must not contain whitespace: {value!r}")
    return value


class RunEntry(NamedTuple):
    doc: DocId
    rank: int
    score: float


@dataclass(frozen=True)
class RankedList:
    """One query's ranked results: ranks exactly 1..n, scores non-increasing."""

    query: QueryId
    entries: tuple[RunEntry, ...]

    def __post_init__(self) -> None:
        check_id(self.query, "query id")
        seen: set[str] = set()
        prev_score = math.inf
        for i, entry in enumerate(self.entries):
            check_id(entry.doc, "doc id")
            if entry.rank != i + 1:
                raise ValueError(
                    f"query {self.query!r}: ranks must be 1..n with no gaps, "
                    f"found rank {entry.rank} at position {i + 1}"
                )
            if entry.doc in seen:
                raise ValueError(f"query {self.query!r}: duplicate doc {entry.doc!r}")
            seen.add(entry.doc)
            if not math.isfinite(entry.score):
                raise ValueError(f"query {self.query!r}: non-finite score at rank {entry.rank}")
            if entry.score > prev_score:
                raise ValueError(
                    f"query {self.query!r}: score increases at rank {entry.rank}"
                )
            prev_score = entry.score

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class RunTable:
    """A system's ranked lists, keyed by query id (ascending)."""

    tag: str
    lists: dict[QueryId, RankedList]
    depth: int = 100

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError(f"depth must be positive, got {self.depth}")
        for qid, lst in self.lists.items():
            if qid != lst.query:
                raise ValueError(f"list keyed {qid!r} belongs to query {lst.query!r}")
            if len(lst) > self.depth:
                raise ValueError(
                    f"query {qid!r}: list length {len(lst)} exceeds depth {self.depth}"
                )
        object.__setattr__(self, "lists", dict(sorted(self.lists.items())))

    def query_ids(self) -> list[QueryId]:
        return list(self.lists)


@dataclass(frozen=True)
class Query:
    id: QueryId
    text: str


@dataclass(frozen=True)
class QuerySet:
    """Ordered query collection; order is file order and is preserved."""

    entries: tuple[Query, ...]
    _by_id: dict[QueryId, Query] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[QueryId, Query] = {}
        for q in self.entries:
            check_id(q.id, "query id")
            if q.id in by_id:
                raise ValueError(f"duplicate query id {q.id!r}")
            by_id[q.id] = q
        object.__setattr__(self, "_by_id", by_id)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "QuerySet":
        return cls(tuple(Query(i, t) for i, t in pairs))

    def ids(self) -> list[QueryId]:
        return [q.id for q in self.entries]

    def __contains__(self, qid: str) -> bool:
        return qid in self._by_id

    def __getitem__(self, qid: str) -> Query:
        return self._by_id[qid]

    def __iter__(self) -> Iterator[Query]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Qrels:
    """Relevance judgments: (query id, doc id) -> grade >= 0."""

    grades: dict[tuple[QueryId, DocId], int]

    def __post_init__(self) -> None:
        for (qid, did), grade in self.grades.items():
            check_id(qid, "query id")
            check_id(did, "doc id")
            if grade < 0:
                raise ValueError(f"negative grade {grade} for ({qid!r}, {did!r})")
        object.__setattr__(self, "grades", dict(sorted(self.grades.items())))

    def grade(self, qid: QueryId, did: DocId) -> int:
        return self.grades.get((qid, did), 0)

    def relevant_counts(self) -> dict[QueryId, int]:
        """Number of docs with grade > 0 per query, ascending query id."""
        counts: dict[QueryId, int] = {}
        for (qid, _), grade in self.grades.items():
            if grade > 0:
                counts[qid] = counts.get(qid, 0) + 1
        return counts

    def grades_for(self, qid: QueryId) -> list[int]:
        return [g for (q, _), g in self.grades.items() if q == qid]


@dataclass(frozen=True)
class ClusterAssignment:
    """Partition of a query set into groups 0..k-1."""

    k: int
    assignment: dict[QueryId, int]

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        for qid, gid in self.assignment.items():
            check_id(qid, "query id")
            if not 0 <= gid < self.k:
                raise ValueError(f"cluster id {gid} for query {qid!r} outside [0, {self.k})")
        object.__setattr__(self, "assignment", dict(sorted(self.assignment.items())))

    def members(self, gid: int) -> list[QueryId]:
        """Query ids of one group, ascending."""
        return [q for q, g in self.assignment.items() if g == gid]

    def groups(self) -> list[list[QueryId]]:
        out: list[list[QueryId]] = [[] for _ in range(self.k)]
        for qid, gid in self.assignment.items():
            out[gid].append(qid)
        return out


@dataclass(frozen=True)
class PooledRetrieved:
    """Score universe: exactly the documents retrieved in the pool."""


@dataclass(frozen=True)
class FullCollection:
    """Score universe: a collection of `size` docs; unlisted docs score 0."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"collection size must be positive, got {self.size}")


Universe = PooledRetrieved | FullCollection

POOLED = PooledRetrieved()


def universe_label(universe: Universe) -> str:
    if isinstance(universe, FullCollection):
        return f"collection:{universe.size}"
    return "pooled"


@dataclass(frozen=True)
class RetrievabilityTable:
    """Per-document retrievability scores for one query population."""

    scores: dict[DocId, float]
    query_count: int
    universe: Universe = POOLED

    def __post_init__(self) -> None:
        if self.query_count < 1:
            raise ValueError(f"query_count must be positive, got {self.query_count}")
        for did, score in self.scores.items():
            check_id(did, "doc id")
            if not math.isfinite(score) or score < 0:
                raise ValueError(f"invalid score {score} for doc {did!r}")
        if isinstance(self.universe, FullCollection) and len(self.scores) > self.universe.size:
            raise ValueError(
                f"{len(self.scores)} scored docs exceed collection size {self.universe.size}"
            )
        object.__setattr__(self, "scores", dict(sorted(self.scores.items())))


@dataclass(frozen=True)
class GroupStats:
    """One group's row in a fairness report. `gini` is None when flagged empty."""

    group: int
    query_count: int
    pooled_doc_count: int
    gini: float | None
    empty: bool = False

    def __post_init__(self) -> None:
        if self.empty:
            if self.gini is not None:
                raise ValueError(f"group {self.group}: empty groups carry no gini")
        else:
            if self.gini is None or not 0.0 <= self.gini < 1.0:
                raise ValueError(f"group {self.group}: gini {self.gini} outside [0, 1)")


@dataclass(frozen=True)
class ReportConfig:
    log_base: str = "e"
    depth: int = 100
    universe: str = "pooled"
    clustering: str = "unspecified"


@dataclass(frozen=True)
class FairnessReport:
    """Per-group Ginis plus their min/avg/max aggregates."""

    k: int
    per_group: tuple[GroupStats, ...]
    aggregates: tuple[float, float, float]
    config: ReportConfig

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if [g.group for g in self.per_group] != sorted(g.group for g in self.per_group):
            raise ValueError("per_group must be ordered by group id")
        lo, mid, hi = self.aggregates
        if not lo <= mid <= hi:
            raise ValueError(f"aggregates must satisfy min <= avg <= max, got {self.aggregates}")

    @property
    def g_min(self) -> float:
        return self.aggregates[0]

    @property
    def g_avg(self) -> float:
        return self.aggregates[1]

    @property
    def g_max(self) -> float:
        return self.aggregates[2]


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise ValueError(f"k1 must be non-negative, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")
