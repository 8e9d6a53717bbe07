"""Filtered subgraph views: full, strict and strict-extended projections."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ProjectionError
from .graph import PropertyGraph

ORIENTATIONS = ("natural", "reverse", "undirected")


@dataclass
class ProjectionSpec:
    name: str
    # label -> included scalar property names (feature schema for embeddings)
    nodes: dict = field(default_factory=dict)
    # relationship type -> orientation
    relationships: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.nodes:
            raise ProjectionError(f"projection {self.name!r}: no node labels")
        for t, o in self.relationships.items():
            if o not in ORIENTATIONS:
                raise ProjectionError(
                    f"projection {self.name!r}: bad orientation {o!r} for {t!r}")

    def to_dict(self) -> dict:
        return {"name": self.name, "nodes": self.nodes,
                "relationships": self.relationships}

    @classmethod
    def from_dict(cls, d: dict) -> "ProjectionSpec":
        return cls(name=d["name"], nodes=dict(d.get("nodes", {})),
                   relationships=dict(d.get("relationships", {})))


class ProjectedGraph:
    """Immutable view over a PropertyGraph: retained nodes/edges + features.

    The source graph must not be mutated while the view is in use.
    """

    def __init__(self, source: PropertyGraph, spec: ProjectionSpec,
                 node_ids, edge_ids):
        self.source = source
        self.spec = spec
        self.node_ids = sorted(node_ids)
        self.edge_ids = sorted(edge_ids)
        self._index = {nid: i for i, nid in enumerate(self.node_ids)}
        self._adj = self._build_adjacency()

    def _build_adjacency(self):
        adj = {nid: [] for nid in self.node_ids}
        for eid in self.edge_ids:
            e = self.source.edges[eid]
            orient = self.spec.relationships.get(e.type, "undirected")
            if orient in ("natural", "undirected"):
                adj[e.source].append(e.target)
            if orient in ("reverse", "undirected"):
                adj[e.target].append(e.source)
        for nid in adj:
            adj[nid] = sorted(set(adj[nid]))
        return adj

    def neighbors(self, node_id: int) -> list:
        return self._adj[node_id]

    def degree(self, node_id: int) -> int:
        return len(self._adj[node_id])

    def label_of(self, node_id: int) -> str:
        return self.source.nodes[node_id].label

    def feature_schema(self, label: str) -> list:
        """Ordered numeric property names declared for a label."""
        return list(self.spec.nodes.get(label, []))

    @property
    def num_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def num_edges(self) -> int:
        return len(self.edge_ids)


def project(graph: PropertyGraph, spec: ProjectionSpec) -> ProjectedGraph:
    """Materialize the view selected by `spec`.

    Nodes whose label is selected are retained; edges whose type is selected
    are retained only when both endpoints are retained (edge closure).
    """
    spec.validate()
    graph_labels = set(graph.labels())
    graph_types = set(graph.edge_types())
    for label in spec.nodes:
        if label not in graph_labels:
            raise ProjectionError(f"projection {spec.name!r}: "
                                  f"label {label!r} absent from graph")
    for t in spec.relationships:
        if t not in graph_types:
            raise ProjectionError(f"projection {spec.name!r}: "
                                  f"edge type {t!r} absent from graph")
    node_ids = set()
    for label in spec.nodes:
        node_ids.update(graph.nodes_with_label(label))
    edge_ids = []
    for t in spec.relationships:
        for eid in graph.edges_with_type(t):
            e = graph.edges[eid]
            if e.source in node_ids and e.target in node_ids:
                edge_ids.append(eid)
    return ProjectedGraph(graph, spec, node_ids, edge_ids)


# Built-in label/type choices per dataset.  The strict pair keeps the
# prediction target reachable; all of these are overridable in config.
_BUILTINS = {
    ("heart", "full"): (
        {"Person": ["age", "gender"], "PersonState": ["cp", "thal"],
         "HeartMeasures": ["thalach", "trestbps"],
         "HeartExames": ["ca", "exang", "oldpeak", "restecg", "slope"],
         "FS": ["type", "value"], "DiseaseResult": ["target"]},
        ["hasDisease", "hasFS", "hasHeartExames", "hasHeartMesures", "hasState"],
    ),
    ("heart", "strict"): (
        {"Person": ["age", "gender"], "DiseaseResult": ["target"]},
        ["hasDisease"],
    ),
    ("heart", "strict_extended"): (
        {"Person": ["age", "gender"],
         "HeartMeasures": ["thalach", "trestbps"],
         "DiseaseResult": ["target"]},
        ["hasHeartMesures", "hasDisease"],
    ),
    ("movielens", "full"): (
        {"User": [], "Movie": [], "Genre": []},
        ["RATED", "OF_GENRE"],
    ),
    ("movielens", "strict"): (
        {"User": [], "Movie": []},
        ["RATED"],
    ),
    ("movielens", "strict_extended"): (
        {"User": [], "Movie": [], "Genre": []},
        ["RATED", "OF_GENRE"],
    ),
}


def builtin_projection(kind: str, dataset: str) -> ProjectionSpec:
    """Default full / strict / strict_extended specs for the two datasets."""
    try:
        nodes, types = _BUILTINS[(dataset, kind)]
    except KeyError:
        raise ProjectionError(
            f"no builtin projection ({kind!r}, {dataset!r})") from None
    return ProjectionSpec(
        name=f"{dataset}_{kind}",
        nodes={l: list(p) for l, p in nodes.items()},
        relationships={t: "undirected" for t in types},
    )
