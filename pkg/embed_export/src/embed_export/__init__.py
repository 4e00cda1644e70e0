from .exporter import (
    DEFAULT_MODEL,
    ModelUnavailableError,
    encode_queries,
    encoder_dimension,
    export,
    load_encoder,
    pooling_mode,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MODEL",
    "ModelUnavailableError",
    "encode_queries",
    "encoder_dimension",
    "export",
    "load_encoder",
    "pooling_mode",
]
