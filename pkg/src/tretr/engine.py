"""Self-contained BM25 engine: tokenizer, inverted index, scoring, and a
synthetic query generator. Everything is deterministic given its inputs so
run files produced here are stable fixtures.
"""

from __future__ import annotations

import json
import math
import random
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, TextIO

import re

from .model import Bm25Params, QuerySet, RankedList, RunEntry, RunTable, check_id
from .trecio import ParseError

# Maximal runs of Unicode alphanumerics; underscore is a separator.
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any run of non-alphanumeric characters."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class InvertedIndex:
    """Postings plus the document statistics BM25 needs.

    `postings` maps term -> ((doc ordinal, term frequency), ...) with
    ordinals ascending; `doc_freq` maps term -> document frequency;
    `bigrams` holds the distinct adjacent term pairs of the corpus
    (kept for the synthetic query generator, which cannot recover
    adjacency from postings alone).
    """

    postings: dict[str, tuple[tuple[int, int], ...]]
    doc_ids: tuple[str, ...]
    doc_lengths: tuple[int, ...]
    avgdl: float
    doc_count: int
    doc_freq: dict[str, int]
    bigrams: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if self.doc_count != len(self.doc_ids) or self.doc_count < 1:
            raise ValueError("doc_count must match doc_ids and be positive")
        if self.avgdl != sum(self.doc_lengths) / self.doc_count or self.avgdl <= 0:
            raise ValueError("avgdl must equal mean(doc_lengths) and be positive")
        pair_total = 0
        for term, plist in self.postings.items():
            if list(plist) != sorted(plist):
                raise ValueError(f"postings for {term!r} not sorted by doc ordinal")
            if self.doc_freq.get(term) != len(plist):
                raise ValueError(f"doc_freq mismatch for {term!r}")
            pair_total += len(plist)
        if pair_total != sum(self.doc_freq.values()):
            raise ValueError("doc_freq totals do not match postings")


def parse_corpus(stream: Iterable[str]) -> list[tuple[str, str]]:
    """Parse a ``docid<TAB>text`` TSV into (doc id, text) pairs."""
    docs: list[tuple[str, str]] = []
    seen: set[str] = set()
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if "\t" not in line:
            raise ParseError("expected docid<TAB>text", lineno)
        did, text = line.split("\t", 1)
        try:
            check_id(did, "doc id")
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if did in seen:
            raise ParseError(f"duplicate doc id {did!r}", lineno)
        seen.add(did)
        docs.append((did, text))
    return docs


def build_index(corpus: Iterable[tuple[str, str]]) -> InvertedIndex:
    """Index an ordered (doc id, text) corpus."""
    docs = list(corpus)
    if not docs:
        raise ValueError("empty corpus")
    doc_ids: list[str] = []
    doc_lengths: list[int] = []
    term_docs: dict[str, list[tuple[int, int]]] = {}
    bigrams: set[tuple[str, str]] = set()
    seen: set[str] = set()
    for ordinal, (did, text) in enumerate(docs):
        check_id(did, "doc id")
        if did in seen:
            raise ValueError(f"duplicate doc id {did!r}")
        seen.add(did)
        tokens = tokenize(text)
        doc_ids.append(did)
        doc_lengths.append(len(tokens))
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term, tf in counts.items():
            term_docs.setdefault(term, []).append((ordinal, tf))
        bigrams.update(zip(tokens, tokens[1:]))
    avgdl = sum(doc_lengths) / len(docs)
    if avgdl <= 0:
        raise ValueError("avgdl must be positive (corpus has no tokens)")
    postings = {t: tuple(term_docs[t]) for t in sorted(term_docs)}
    doc_freq = {t: len(p) for t, p in postings.items()}
    return InvertedIndex(
        postings=postings,
        doc_ids=tuple(doc_ids),
        doc_lengths=tuple(doc_lengths),
        avgdl=avgdl,
        doc_count=len(docs),
        doc_freq=doc_freq,
        bigrams=tuple(sorted(bigrams)),
    )


def idf(index: InvertedIndex, term: str) -> float:
    """Robertson idf with +1 inside the log, so it is never negative."""
    df = index.doc_freq.get(term, 0)
    return math.log((index.doc_count - df + 0.5) / (df + 0.5) + 1.0)


def bm25_search(
    index: InvertedIndex,
    query: str,
    params: Bm25Params | None = None,
    depth: int = 100,
    query_id: str = "q",
) -> RankedList:
    """Score all matching docs; ties break by doc id ascending."""
    params = params or Bm25Params()
    terms: list[str] = []
    for tok in tokenize(query):
        if tok not in terms:
            terms.append(tok)
    scores: dict[int, float] = {}
    for term in terms:
        plist = index.postings.get(term)
        if plist is None:
            continue
        w = idf(index, term)
        for ordinal, tf in plist:
            dl = index.doc_lengths[ordinal]
            norm = params.k1 * (1.0 - params.b + params.b * dl / index.avgdl)
            scores[ordinal] = scores.get(ordinal, 0.0) + w * tf * (params.k1 + 1.0) / (tf + norm)
    hits = sorted(scores.items(), key=lambda it: (-it[1], index.doc_ids[it[0]]))
    entries = tuple(
        RunEntry(index.doc_ids[ordinal], rank, score)
        for rank, (ordinal, score) in enumerate(hits[:depth], 1)
    )
    return RankedList(query_id, entries)


def search_all(
    index: InvertedIndex,
    queries: QuerySet,
    params: Bm25Params | None = None,
    depth: int = 100,
    tag: str = "bm25",
    threads: int = 1,
) -> RunTable:
    """Run every query; output is keyed by query id, independent of `threads`."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ranked = list(
                pool.map(lambda q: bm25_search(index, q.text, params, depth, q.id), queries)
            )
    else:
        ranked = [bm25_search(index, q.text, params, depth, q.id) for q in queries]
    return RunTable(tag=tag, lists={r.query: r for r in ranked}, depth=depth)


def generate_synthetic_queries(
    index: InvertedIndex, count: int, bigram_fraction: float, seed: int
) -> QuerySet:
    """Sample queries from the collection: unigrams weighted by collection
    term frequency, bigrams uniformly over distinct adjacent pairs.

    Ids are ``synth-<i>`` in generation order; the unigram block comes
    first, then ``round(count * bigram_fraction)`` bigram queries.
    """
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if not 0.0 <= bigram_fraction <= 1.0:
        raise ValueError(f"bigram_fraction must be in [0, 1], got {bigram_fraction}")
    if bigram_fraction > 0 and not index.bigrams:
        raise ValueError("bigram_fraction > 0 but the corpus has no bigrams")

    terms = list(index.postings)
    cumulative: list[int] = []
    total = 0
    for term in terms:
        total += sum(tf for _, tf in index.postings[term])
        cumulative.append(total)

    n_bigram = int(count * bigram_fraction + 0.5)
    rng = random.Random(seed)
    pairs: list[tuple[str, str]] = []
    for i in range(count - n_bigram):
        term = terms[bisect_right(cumulative, rng.randrange(total))]
        pairs.append((f"synth-{i}", term))
    for i in range(count - n_bigram, count):
        a, b = index.bigrams[rng.randrange(len(index.bigrams))]
        pairs.append((f"synth-{i}", f"{a} {b}"))
    return QuerySet.from_pairs(pairs)


# --- index persistence (JSON, canonical byte order) ---------------------


def save_index(index: InvertedIndex, stream: TextIO) -> None:
    doc = {
        "doc_ids": list(index.doc_ids),
        "doc_lengths": list(index.doc_lengths),
        "postings": {t: [list(p) for p in plist] for t, plist in index.postings.items()},
        "bigrams": [list(b) for b in index.bigrams],
    }
    json.dump(doc, stream, sort_keys=True)
    stream.write("\n")


def load_index(stream: TextIO) -> InvertedIndex:
    doc = json.load(stream)
    doc_ids = tuple(doc["doc_ids"])
    doc_lengths = tuple(int(x) for x in doc["doc_lengths"])
    postings = {
        t: tuple((int(o), int(tf)) for o, tf in plist)
        for t, plist in sorted(doc["postings"].items())
    }
    if not doc_ids:
        raise ValueError("empty corpus")
    return InvertedIndex(
        postings=postings,
        doc_ids=doc_ids,
        doc_lengths=doc_lengths,
        avgdl=sum(doc_lengths) / len(doc_ids),
        doc_count=len(doc_ids),
        doc_freq={t: len(p) for t, p in postings.items()},
        bigrams=tuple((a, b) for a, b in doc["bigrams"]),
    )
