from .config import (
    EmbeddingConfig,
    EmbeddingSet,
    PROPERTY_NAMES,
    write_embeddings,
)
from .node2vec import node2vec
from .fastrp import fastrp
from .graphsage import graphsage

METHODS = {
    "node2vec": node2vec,
    "fastrp": fastrp,
    "graphsage": graphsage,
}


def run_method(view, cfg: EmbeddingConfig) -> EmbeddingSet:
    """Dispatch on cfg.method."""
    return METHODS[cfg.method](view, cfg)


__all__ = [
    "EmbeddingConfig", "EmbeddingSet", "PROPERTY_NAMES", "write_embeddings",
    "node2vec", "fastrp", "graphsage", "run_method", "METHODS",
]
