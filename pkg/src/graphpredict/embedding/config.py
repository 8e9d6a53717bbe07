"""Embedding configuration, result container, and graph write-back."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, NodeNotFoundError
from ..graph import PropertyGraph

PROPERTY_NAMES = {
    "node2vec": "node2vec_embedding",
    "graphsage": "graphsage_embedding",
    "fastrp": "fastRP_embedding",
}

NODE2VEC_DEFAULTS = {
    "p": 1.0, "q": 1.0, "walk_length": 80, "walks_per_node": 10,
    "window": 10, "negatives": 5, "epochs": 5, "learning_rate": 0.025,
}

FASTRP_DEFAULTS = {
    "iteration_weights": [0.0, 1.0, 1.0],
    "normalization_strength": 0.0,
}

GRAPHSAGE_DEFAULTS = {
    "layers": 2, "hidden_dim": None, "negatives": 5, "epochs": 10,
    "learning_rate": 0.01, "walk_length": 5, "walks_per_node": 3,
    "window": 2, "sample_sizes": [25, 10], "degree_fallback": True,
}

_DEFAULTS = {
    "node2vec": NODE2VEC_DEFAULTS,
    "fastrp": FASTRP_DEFAULTS,
    "graphsage": GRAPHSAGE_DEFAULTS,
}


@dataclass
class EmbeddingConfig:
    method: str
    dimension: int = 10
    seed: int = 42
    params: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Defaults overlaid with caller params, after validation."""
        if self.method not in _DEFAULTS:
            raise ConfigError(f"unknown embedding method {self.method!r}")
        if self.dimension < 2:
            raise ConfigError(f"dimension must be >= 2, got {self.dimension}")
        unknown = set(self.params) - set(_DEFAULTS[self.method])
        if unknown:
            raise ConfigError(f"{self.method}: unknown params {sorted(unknown)}")
        p = dict(_DEFAULTS[self.method])
        p.update(self.params)
        if self.method == "node2vec":
            if p["p"] <= 0 or p["q"] <= 0:
                raise ConfigError("node2vec: p and q must be > 0")
            if p["walk_length"] < 2:
                raise ConfigError("node2vec: walk_length must be >= 2")
            for k in ("walks_per_node", "window", "negatives", "epochs"):
                if p[k] < 1:
                    raise ConfigError(f"node2vec: {k} must be >= 1")
        elif self.method == "fastrp":
            w = list(p["iteration_weights"])
            if not w:
                raise ConfigError("fastrp: iteration_weights must be non-empty")
            if all(x == 0 for x in w):
                raise ConfigError("fastrp: at least one iteration weight "
                                  "must be nonzero")
            p["iteration_weights"] = w
        elif self.method == "graphsage":
            for k in ("layers", "negatives", "epochs", "walks_per_node",
                      "walk_length", "window"):
                if p[k] < 1:
                    raise ConfigError(f"graphsage: {k} must be >= 1")
            if p["hidden_dim"] is None:
                p["hidden_dim"] = self.dimension
        return p


class EmbeddingSet:
    """Node id -> fixed-length vector, tagged with provenance."""

    def __init__(self, provenance: dict, vectors: dict):
        self.provenance = dict(provenance)
        self.vectors = {}
        dim = None
        for nid in sorted(vectors):
            v = np.asarray(vectors[nid], dtype=np.float64)
            if v.ndim != 1:
                raise ConfigError(f"node {nid}: vector must be 1-D")
            if dim is None:
                dim = v.shape[0]
            elif v.shape[0] != dim:
                raise ConfigError(f"node {nid}: dimension {v.shape[0]} != {dim}")
            if not np.all(np.isfinite(v)):
                raise ConfigError(f"node {nid}: non-finite entries")
            self.vectors[nid] = v
        self.dimension = dim if dim is not None else 0

    def __len__(self):
        return len(self.vectors)

    def node_ids(self) -> list:
        return sorted(self.vectors)

    def matrix(self):
        """(ids, n x d array) in ascending node-id order."""
        ids = self.node_ids()
        if not ids:
            return ids, np.zeros((0, self.dimension))
        return ids, np.stack([self.vectors[i] for i in ids])

    # -- CSV + provenance sidecar ------------------------------------------

    def to_csv(self, labels: dict | None = None) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        d = self.dimension
        w.writerow(["node_id", "label"] + [f"v{i}" for i in range(d)])
        for nid in self.node_ids():
            label = (labels or {}).get(nid, "")
            w.writerow([nid, label] + [repr(float(x)) for x in self.vectors[nid]])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, provenance: dict | None = None) -> "EmbeddingSet":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        vectors = {}
        for row in reader:
            vectors[int(row[0])] = [float(x) for x in row[2:]]
        return cls(provenance or {}, vectors)

    @staticmethod
    def labels_from_csv(text: str) -> dict:
        reader = csv.reader(io.StringIO(text))
        next(reader)
        return {int(row[0]): row[1] for row in reader}

    def provenance_json(self) -> str:
        return json.dumps(self.provenance, sort_keys=True, separators=(",", ":"))


def make_provenance(view, cfg: EmbeddingConfig, deterministic: bool = True,
                    **extra) -> dict:
    prov = {
        "projection": view.spec.name,
        "method": cfg.method,
        "dimension": cfg.dimension,
        "seed": cfg.seed,
        "deterministic": deterministic,
    }
    prov.update(extra)
    return prov


def write_embeddings(graph: PropertyGraph, eset: EmbeddingSet) -> None:
    """Store vectors under `{method}_embedding`; upserts existing values."""
    method = eset.provenance.get("method")
    if method not in PROPERTY_NAMES:
        raise ConfigError(f"embedding set has unknown method {method!r}")
    stale = [nid for nid in eset.node_ids() if nid not in graph.nodes]
    if stale:
        raise NodeNotFoundError(f"node ids not in graph: {stale}")
    name = PROPERTY_NAMES[method]
    for nid in eset.node_ids():
        graph.set_node_property(nid, name, list(eset.vectors[nid]))
