"""Session fixtures: a bundled 300-doc topical corpus plus everything the
pipeline derives from it (index, synthetic queries, BM25 run). All
derivations are seeded, so every test sees identical objects.
"""

import pathlib

import pytest

from tretr import build_index, generate_synthetic_queries, parse_corpus, search_all

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> pathlib.Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def corpus_docs():
    with open(DATA_DIR / "corpus.tsv", encoding="utf-8") as fh:
        return parse_corpus(fh)


@pytest.fixture(scope="session")
def toy_index(corpus_docs):
    return build_index(corpus_docs)


@pytest.fixture(scope="session")
def toy_queries(toy_index):
    return generate_synthetic_queries(toy_index, count=120, bigram_fraction=0.3, seed=42)


@pytest.fixture(scope="session")
def toy_run(toy_index, toy_queries):
    return search_all(toy_index, toy_queries, tag="toy")
