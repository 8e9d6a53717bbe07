"""Property-graph embedding and predictive-query pipeline."""

from .graph import Edge, Node, PropertyGraph
from .projection import ProjectionSpec, ProjectedGraph, builtin_projection, project
from .schema import SchemaMap, builtin_map, ingest_csv

__version__ = "0.1.0"

__all__ = [
    "Edge", "Node", "PropertyGraph",
    "ProjectionSpec", "ProjectedGraph", "builtin_projection", "project",
    "SchemaMap", "builtin_map", "ingest_csv",
    "__version__",
]
