"""Encode query texts with a pre-trained sentence encoder and write the
binary matrix the clustering side consumes.

Vectors are exported raw; normalization is the consumer's job, so the
TF-IDF and dense paths share one code path over there.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from tretr import EmbeddingMatrix, QuerySet, parse_queries, write_embeddings

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"


class ModelUnavailableError(RuntimeError):
    """The encoder could not be loaded (bad name, no cache, no network)."""


def load_encoder(model_name: str):
    from sentence_transformers import SentenceTransformer

    try:
        return SentenceTransformer(model_name)
    except KeyboardInterrupt:
        raise
    except Exception as exc:
        raise ModelUnavailableError(f"cannot load encoder {model_name!r}: {exc}") from exc


def encoder_dimension(model) -> int | None:
    """Output width as the encoder reports it, None if it will not say."""
    for attr in ("get_embedding_dimension", "get_sentence_embedding_dimension"):
        getter = getattr(model, attr, None)
        if getter is not None:
            dim = getter()
            if dim is not None:
                return int(dim)
    return None


def pooling_mode(model) -> str:
    for module in getattr(model, "children", lambda: [])():
        mode = getattr(module, "pooling_mode", None)
        if isinstance(mode, str):
            return mode
        getter = getattr(module, "get_pooling_mode_str", None)  # older releases
        if getter is not None:
            return str(getter())
    return "unknown"


def encode_queries(model, queries: QuerySet, batch_size: int) -> np.ndarray:
    if batch_size < 1:
        raise ValueError(f"batch size must be positive, got {batch_size}")
    texts = [query.text for query in queries]
    if not texts:
        dim = encoder_dimension(model)
        if dim is None:
            raise ValueError("empty queries file and the encoder does not report a dimension")
        return np.zeros((0, dim), dtype=np.float32)
    rows = model.encode(
        texts,
        batch_size=batch_size,
        convert_to_numpy=True,
        normalize_embeddings=False,
        show_progress_bar=False,
    )
    rows = np.asarray(rows, dtype=np.float32)
    dim = encoder_dimension(model)
    if dim is not None and rows.shape[1] != dim:
        raise ValueError(
            f"encoder reports dimension {dim} but produced rows of width {rows.shape[1]}"
        )
    return rows


def export(
    queries_path: str | Path,
    model_name: str = DEFAULT_MODEL,
    batch_size: int = 32,
    out_path: str | Path = "embeddings.bin",
) -> EmbeddingMatrix:
    """Encode every query in the TSV, in file order, and write the matrix.

    Returns the matrix that was written. Raises ModelUnavailableError if
    the encoder cannot be loaded, ValueError on malformed input."""
    with open(queries_path, encoding="utf-8") as fh:
        queries = parse_queries(fh)
    model = load_encoder(model_name)
    rows = encode_queries(model, queries, batch_size)
    matrix = EmbeddingMatrix(tuple(q.id for q in queries), rows)
    with open(out_path, "wb") as fh:
        write_embeddings(matrix, fh, comment=f"pooling={pooling_mode(model)}")
    return matrix
