"""Query grouping: TF-IDF vectorization plus Lloyd's K-means.

Both representations are L2-normalized before clustering, so squared
Euclidean distance is monotone in cosine distance and the sparse and
dense paths are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .engine import tokenize
from .model import ClusterAssignment, QuerySet
from .trecio import EmbeddingMatrix


@dataclass(frozen=True)
class SparseVector:
    """L2-normalized sparse vector; `norm` keeps the pre-normalization
    magnitude. The zero vector is indices=(), values=(), norm=0."""

    indices: tuple[int, ...]
    values: tuple[float, ...]
    norm: float

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values must have equal length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly ascending")
        if any(not math.isfinite(v) or v <= 0 for v in self.values):
            raise ValueError("values must be finite and positive")
        if not math.isfinite(self.norm) or self.norm < 0:
            raise ValueError("norm must be finite and non-negative")
        if self.values:
            s = math.fsum(v * v for v in self.values)
            if not math.isclose(s, 1.0, rel_tol=1e-9):
                raise ValueError("values must have unit L2 norm")
        elif self.norm != 0:
            raise ValueError("empty vector must have norm 0")

    @classmethod
    def from_weights(cls, weights: dict[int, float]) -> "SparseVector":
        items = sorted(weights.items())
        norm = math.sqrt(math.fsum(w * w for _, w in items))
        if norm == 0:
            return cls((), (), 0.0)
        return cls(
            tuple(i for i, _ in items),
            tuple(w / norm for _, w in items),
            norm,
        )


@dataclass(frozen=True)
class CentroidSet:
    """Converged centroids plus the per-iteration objective trace."""

    centroids: np.ndarray
    objective: float
    history: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.centroids.ndim != 2 or self.centroids.shape[0] < 1:
            raise ValueError("centroids must be a k x d array with k >= 1")
        if np.isnan(self.centroids).any():
            raise ValueError("centroids contain NaN")
        if not math.isfinite(self.objective) or self.objective < 0:
            raise ValueError("objective must be finite and non-negative")

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])


def tfidf_vectorize(queries: QuerySet) -> tuple[dict[str, int], list[SparseVector]]:
    """TF-IDF over the query set itself.

    tf is the raw in-query count; idf = ln((Nq+1)/(df+1)) + 1 so terms
    never get zero or negative weight; ordinals follow first occurrence.
    """
    if len(queries) == 0:
        raise ValueError("empty query set")
    vocab: dict[str, int] = {}
    token_lists: list[list[str]] = []
    df: dict[str, int] = {}
    for q in queries:
        tokens = tokenize(q.text)
        token_lists.append(tokens)
        for term in tokens:
            if term not in vocab:
                vocab[term] = len(vocab)
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    nq = len(queries)
    idf = {t: math.log((nq + 1) / (df[t] + 1)) + 1.0 for t in vocab}
    vectors: list[SparseVector] = []
    for tokens in token_lists:
        counts: dict[str, int] = {}
        for term in tokens:
            counts[term] = counts.get(term, 0) + 1
        vectors.append(
            SparseVector.from_weights({vocab[t]: c * idf[t] for t, c in counts.items()})
        )
    return vocab, vectors


def densify(vectors: Sequence[SparseVector], dim: int) -> np.ndarray:
    out = np.zeros((len(vectors), dim), dtype=np.float64)
    for row, vec in enumerate(vectors):
        for col, val in zip(vec.indices, vec.values):
            out[row, col] = val
    return out


def _normalize_rows(points: np.ndarray) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    safe = np.where(norms == 0, 1.0, norms)
    return x / safe


def _seed_plusplus(x: np.ndarray, candidates: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    cand = x[candidates]
    chosen = [int(rng.integers(len(candidates)))]
    d2 = ((cand - cand[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            pick = int(rng.choice(len(candidates), p=d2 / total))
        else:
            # all remaining candidates coincide with a chosen centroid
            pick = int(rng.integers(len(candidates)))
        chosen.append(pick)
        d2 = np.minimum(d2, ((cand - cand[pick]) ** 2).sum(axis=1))
    return cand[chosen].copy()


def kmeans(
    vectors: Sequence[SparseVector] | np.ndarray,
    k: int,
    seed: int = 0,
    init: str | Sequence[int] = "plusplus",
    max_iter: int = 100,
    tol: float = 1e-4,
    ids: Sequence[str] | None = None,
    dim: int | None = None,
) -> tuple[ClusterAssignment, CentroidSet]:
    """Lloyd's iterations with squared Euclidean distance.

    `init` is either "plusplus" or an explicit list of k point indices.
    Zero vectors never seed clusters and never move centroids; they land
    in group 0 once the rest has converged. `ids` labels the points in
    the returned assignment; defaults to the stringified point index.
    """
    if isinstance(vectors, np.ndarray):
        x = _normalize_rows(vectors)
    else:
        if dim is None:
            dim = max((v.indices[-1] + 1 for v in vectors if v.indices), default=1)
        x = densify(vectors, dim)
    n = x.shape[0]
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points ({n})")
    if max_iter < 1 or tol <= 0:
        raise ValueError("max_iter must be positive and tol > 0")
    if ids is None:
        ids = [str(i) for i in range(n)]
    elif len(ids) != n:
        raise ValueError("ids length must match the number of points")

    nonzero = np.flatnonzero((x != 0).any(axis=1))
    if isinstance(init, str):
        if init != "plusplus":
            raise ValueError(f"unknown init {init!r}")
        if nonzero.size == 0:
            raise ValueError("no nonzero vectors to seed from")
        centroids = _seed_plusplus(x, nonzero, k, seed)
    else:
        picks = list(init)
        if len(picks) != k:
            raise ValueError(f"explicit init needs exactly {k} indices")
        if any(not 0 <= p < n for p in picks):
            raise ValueError("explicit init index out of range")
        centroids = x[picks].copy()

    xnz = x[nonzero]
    m = xnz.shape[0]
    labels = np.zeros(m, dtype=np.int64)
    history: list[float] = []
    objective = 0.0
    for it in range(max_iter):
        # assignment; argmin breaks ties toward the lowest centroid id
        d2 = ((xnz[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        for _ in range(k):  # empty-cluster repair
            empty = np.flatnonzero(np.bincount(labels, minlength=k) == 0)
            if empty.size == 0 or m == 0:
                break
            assigned = d2[np.arange(m), labels].copy()
            for gid in empty:
                far = int(assigned.argmax())
                centroids[gid] = xnz[far]
                assigned[far] = -np.inf
            d2 = ((xnz[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
            labels = d2.argmin(axis=1)
        objective = float(d2[np.arange(m), labels].sum()) if m else 0.0
        history.append(objective)
        prev = history[-2] if len(history) > 1 else None
        if objective == 0.0 or (prev is not None and prev - objective < tol * prev):
            break
        if it == max_iter - 1:
            break  # keep labels consistent with the centroids they used
        # update: plain means, summed in point-index order for bit stability
        for gid in range(k):
            members = xnz[labels == gid]
            if members.shape[0]:
                centroids[gid] = members.sum(axis=0) / members.shape[0]

    full = np.zeros(n, dtype=np.int64)
    full[nonzero] = labels
    assignment = ClusterAssignment(k=k, assignment={ids[i]: int(full[i]) for i in range(n)})
    return assignment, CentroidSet(centroids=centroids, objective=objective, history=tuple(history))


def cluster_queries(
    queries: QuerySet,
    representation: EmbeddingMatrix | str = "tfidf",
    k: int = 1,
    seed: int = 0,
    init: str | Sequence[int] = "plusplus",
    max_iter: int = 100,
    tol: float = 1e-4,
) -> ClusterAssignment:
    """Vectorize (or look up) each query, then cluster. Point order is
    the query-set order, so results are deterministic for a given file."""
    qids = [q.id for q in queries]
    if isinstance(representation, str):
        if representation != "tfidf":
            raise ValueError(f"unknown representation {representation!r}")
        vocab, vectors = tfidf_vectorize(queries)
        points = densify(vectors, max(len(vocab), 1))
    else:
        missing = [qid for qid in qids if qid not in representation.ids]
        if missing:
            raise ValueError(f"embedding matrix missing query id {missing[0]!r}")
        row_of = {qid: i for i, qid in enumerate(representation.ids)}
        points = np.asarray(
            representation.data[[row_of[qid] for qid in qids]], dtype=np.float64
        )
    assignment, _ = kmeans(
        points, k, seed=seed, init=init, max_iter=max_iter, tol=tol, ids=qids
    )
    return assignment
