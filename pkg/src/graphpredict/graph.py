"""In-memory property graph with labels, typed edges and key-value properties.

Property values are restricted to int, float, str and flat real vectors
(stored as lists of floats).  Vectors must be finite and non-empty so that
embedding consumers never have to re-validate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import NodeNotFoundError, ValidationError

PropertyValue = Union[int, float, str, list]


def validate_property_value(name: str, value: PropertyValue) -> PropertyValue:
    """Check a property value; vectors are coerced to lists of floats."""
    if isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"property '{name}': non-finite scalar {value!r}")
        return value
    if isinstance(value, (list, tuple)) or hasattr(value, "__len__"):
        vec = [float(x) for x in value]
        if not vec:
            raise ValidationError(f"property '{name}': empty vector")
        if not all(math.isfinite(x) for x in vec):
            raise ValidationError(f"property '{name}': vector contains NaN/Inf")
        return vec
    raise ValidationError(f"property '{name}': unsupported type {type(value).__name__}")


@dataclass
class Node:
    id: int
    label: str
    properties: dict = field(default_factory=dict)


@dataclass
class Edge:
    id: int
    type: str
    source: int
    target: int
    properties: dict = field(default_factory=dict)


class PropertyGraph:
    """Mutable labeled property graph with label/type/adjacency indices.

    Single-writer, multiple-reader: callers must not mutate concurrently
    with reads.  All read paths return data in deterministic order.
    """

    def __init__(self):
        self.nodes: dict[int, Node] = {}
        self.edges: dict[int, Edge] = {}
        self._next_node_id = 0
        self._next_edge_id = 0
        self._by_label: dict[str, set[int]] = {}
        self._by_type: dict[str, set[int]] = {}
        # node id -> edge type -> list of edge ids
        self._out: dict[int, dict[str, list[int]]] = {}
        self._in: dict[int, dict[str, list[int]]] = {}

    # -- construction -------------------------------------------------------

    def add_node(self, label: str, properties: Optional[dict] = None,
                 node_id: Optional[int] = None) -> int:
        if not label:
            raise ValidationError("node label must be non-empty")
        if node_id is None:
            node_id = self._next_node_id
        if node_id in self.nodes:
            raise ValidationError(f"duplicate node id {node_id}")
        props = {}
        for k, v in (properties or {}).items():
            props[k] = validate_property_value(k, v)
        self.nodes[node_id] = Node(node_id, label, props)
        self._next_node_id = max(self._next_node_id, node_id + 1)
        self._by_label.setdefault(label, set()).add(node_id)
        self._out.setdefault(node_id, {})
        self._in.setdefault(node_id, {})
        return node_id

    def add_edge(self, type: str, source: int, target: int,
                 properties: Optional[dict] = None,
                 edge_id: Optional[int] = None) -> int:
        if source not in self.nodes:
            raise NodeNotFoundError(f"edge source {source} not in graph")
        if target not in self.nodes:
            raise NodeNotFoundError(f"edge target {target} not in graph")
        if edge_id is None:
            edge_id = self._next_edge_id
        if edge_id in self.edges:
            raise ValidationError(f"duplicate edge id {edge_id}")
        props = {}
        for k, v in (properties or {}).items():
            props[k] = validate_property_value(k, v)
        self.edges[edge_id] = Edge(edge_id, type, source, target, props)
        self._next_edge_id = max(self._next_edge_id, edge_id + 1)
        self._by_type.setdefault(type, set()).add(edge_id)
        self._out[source].setdefault(type, []).append(edge_id)
        self._in[target].setdefault(type, []).append(edge_id)
        return edge_id

    # -- lookups ------------------------------------------------------------

    def node(self, node_id: int) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NodeNotFoundError(f"node {node_id} not in graph") from None

    def labels(self) -> list[str]:
        return sorted(l for l, ids in self._by_label.items() if ids)

    def edge_types(self) -> list[str]:
        return sorted(t for t, ids in self._by_type.items() if ids)

    def nodes_with_label(self, label: str) -> list[int]:
        return sorted(self._by_label.get(label, ()))

    def edges_with_type(self, type: str) -> list[int]:
        return sorted(self._by_type.get(type, ()))

    def find_node(self, label: str, prop: str, value) -> Optional[int]:
        """First node (lowest id) of `label` whose property equals `value`."""
        for nid in self.nodes_with_label(label):
            if self.nodes[nid].properties.get(prop) == value:
                return nid
        return None

    def neighbors(self, node_id: int, type: Optional[str] = None,
                  direction: str = "out") -> list[int]:
        """Distinct neighbor ids via edges of `type`, ascending id order.

        `type` of None matches every edge type.
        """
        self.node(node_id)
        if direction not in ("out", "in", "undirected"):
            raise ValueError(f"bad direction {direction!r}")
        found: set[int] = set()
        if direction in ("out", "undirected"):
            for t, eids in self._out[node_id].items():
                if type is None or t == type:
                    found.update(self.edges[e].target for e in eids)
        if direction in ("in", "undirected"):
            for t, eids in self._in[node_id].items():
                if type is None or t == type:
                    found.update(self.edges[e].source for e in eids)
        return sorted(found)

    def incident_edges(self, node_id: int, type: Optional[str] = None,
                       direction: str = "out") -> list[int]:
        self.node(node_id)
        index = {"out": (self._out,), "in": (self._in,),
                 "undirected": (self._out, self._in)}[direction]
        eids: set[int] = set()
        for side in index:
            for t, ids in side[node_id].items():
                if type is None or t == type:
                    eids.update(ids)
        return sorted(eids)

    # -- mutation -----------------------------------------------------------

    def set_node_property(self, node_id: int, name: str, value: PropertyValue) -> None:
        node = self.node(node_id)
        node.properties[name] = validate_property_value(name, value)

    # -- integrity ----------------------------------------------------------

    def audit(self) -> list[str]:
        """Cross-check indices against the node/edge sets; returns violations."""
        problems = []
        for eid, edge in self.edges.items():
            if edge.source not in self.nodes:
                problems.append(f"edge {eid}: dangling source {edge.source}")
            elif eid not in self._out.get(edge.source, {}).get(edge.type, []):
                problems.append(f"edge {eid}: missing from out-index of {edge.source}")
            if edge.target not in self.nodes:
                problems.append(f"edge {eid}: dangling target {edge.target}")
            elif eid not in self._in.get(edge.target, {}).get(edge.type, []):
                problems.append(f"edge {eid}: missing from in-index of {edge.target}")
            if eid not in self._by_type.get(edge.type, set()):
                problems.append(f"edge {eid}: missing from type index")
        for nid, node in self.nodes.items():
            if nid not in self._by_label.get(node.label, set()):
                problems.append(f"node {nid}: missing from label index")
        for t, eids in self._by_type.items():
            for eid in eids:
                if eid not in self.edges:
                    problems.append(f"type index {t}: stale edge {eid}")
        for side_name, side in (("out", self._out), ("in", self._in)):
            for nid, per_type in side.items():
                for t, eids in per_type.items():
                    for eid in eids:
                        if eid not in self.edges:
                            problems.append(f"{side_name}-index {nid}/{t}: stale edge {eid}")
        return problems

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "nodes": [
                {"id": n.id, "label": n.label, "properties": n.properties}
                for n in (self.nodes[i] for i in sorted(self.nodes))
            ],
            "edges": [
                {"id": e.id, "type": e.type, "source": e.source,
                 "target": e.target, "properties": e.properties}
                for e in (self.edges[i] for i in sorted(self.edges))
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "PropertyGraph":
        doc = json.loads(text)
        g = cls()
        for n in doc["nodes"]:
            g.add_node(n["label"], n["properties"], node_id=n["id"])
        for e in doc["edges"]:
            g.add_edge(e["type"], e["source"], e["target"], e["properties"],
                       edge_id=e["id"])
        return g

    # -- convenience --------------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def num_edges(self) -> int:
        return len(self.edges)
