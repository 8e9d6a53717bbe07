"""Vector similarity, exact and approximate KNN, and SIMILAR-edge writes.

Score convention: cosine c maps to (c + 1) / 2 and euclidean distance d to
1 / (1 + d), so every written score lies in [0, 1].  Raw cosine/distance
are available from `similarity`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, PropertyError, ValidationError
from .graph import PropertyGraph

_NNDESCENT_MAX_ROUNDS = 20


@dataclass
class KnnConfig:
    topK: int = 5
    nodeProperty: str = "graphsage_embedding"
    metric: str = "cosine"
    deltaThreshold: float = 0.7
    randomSeed: int = 42
    writeRelationshipType: str = "SIMILAR"
    writeProperty: str = "score"
    mode: str = "exact"
    labelFilter: str | None = None

    def validate(self):
        if self.topK < 1:
            raise ConfigError(f"topK must be >= 1, got {self.topK}")
        if not 0.0 <= self.deltaThreshold <= 1.0:
            raise ConfigError(
                f"deltaThreshold must be in [0,1], got {self.deltaThreshold}")
        if self.metric not in ("cosine", "euclidean"):
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.mode not in ("exact", "approximate"):
            raise ConfigError(f"unknown mode {self.mode!r}")


@dataclass
class KnnStats:
    nodesCompared: int
    relationshipsWritten: int
    meanSimilarity: float

    def to_dict(self) -> dict:
        return {"nodesCompared": self.nodesCompared,
                "relationshipsWritten": self.relationshipsWritten,
                "meanSimilarity": self.meanSimilarity}


def similarity(a, b, metric: str = "cosine") -> float:
    """Raw cosine (in [-1, 1]) or euclidean distance between two vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if metric == "cosine":
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            raise ValidationError("cosine similarity undefined for zero vector")
        return float(np.clip(a @ b / (na * nb), -1.0, 1.0))
    if metric == "euclidean":
        return float(np.linalg.norm(a - b))
    raise ConfigError(f"unknown metric {metric!r}")


def to_score(value: float, metric: str) -> float:
    """Map a raw metric value onto the [0, 1] score scale."""
    if metric == "cosine":
        return (value + 1.0) / 2.0
    return 1.0 / (1.0 + value)


def _scoped_vectors(graph: PropertyGraph, prop: str, label_filter):
    """(ids, matrix) of in-scope nodes; scope = label filter + property."""
    if label_filter is not None:
        ids = graph.nodes_with_label(label_filter)
        missing = [nid for nid in ids
                   if not isinstance(graph.nodes[nid].properties.get(prop), list)]
        if missing:
            raise PropertyError(
                f"nodes missing vector property {prop!r}: {missing}")
    else:
        ids = [nid for nid in sorted(graph.nodes)
               if isinstance(graph.nodes[nid].properties.get(prop), list)]
    vecs = [graph.nodes[nid].properties[prop] for nid in ids]
    dims = {len(v) for v in vecs}
    if len(dims) > 1:
        raise DimensionError(f"mixed vector dimensions {sorted(dims)} "
                             f"under property {prop!r}")
    m = np.array(vecs, dtype=np.float64) if ids else np.zeros((0, 0))
    return ids, m


def _score_matrix(m: np.ndarray, metric: str) -> np.ndarray:
    """All-pairs score matrix on the [0, 1] scale."""
    if metric == "cosine":
        norms = np.linalg.norm(m, axis=1)
        if np.any(norms == 0):
            raise ValidationError("cosine similarity undefined for zero vector")
        mn = m / norms[:, None]
        return (np.clip(mn @ mn.T, -1.0, 1.0) + 1.0) / 2.0
    sq = np.sum(m * m, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (m @ m.T), 0.0)
    return 1.0 / (1.0 + np.sqrt(d2))


def _rank_row(scores: np.ndarray, exclude: int, k: int):
    """Indices of the k best scores (ties by ascending index), self excluded."""
    order = np.lexsort((np.arange(scores.size), -scores))
    out = [j for j in order if j != exclude]
    return out[:k]


def _exact_topk(S: np.ndarray, k: int):
    return [_rank_row(S[i], i, k) for i in range(S.shape[0])]


def _nn_descent(S_row_fn, n: int, k: int, delta: float, rng):
    """Neighbor-list descent using only per-pair score evaluations.

    Terminates when the fraction of updated (node, neighbor) slots in a
    round drops below (1 - delta), or after a round cap.
    """
    # score cache keyed by unordered pair
    cache = {}

    def score(i, j):
        key = (i, j) if i < j else (j, i)
        if key not in cache:
            cache[key] = S_row_fn(i, j)
        return cache[key]

    current = []
    for i in range(n):
        cand = [j for j in range(n) if j != i]
        pick = rng.choice(len(cand), size=min(k, len(cand)), replace=False)
        lst = sorted(((score(i, cand[j]), cand[j]) for j in pick),
                     key=lambda t: (-t[0], t[1]))
        current.append(lst)

    total_slots = sum(len(l) for l in current)
    for _ in range(_NNDESCENT_MAX_ROUNDS):
        reverse = [[] for _ in range(n)]
        for i in range(n):
            for _, j in current[i]:
                reverse[j].append(i)
        updates = 0
        for i in range(n):
            cand = set(j for _, j in current[i]) | set(reverse[i])
            for j in list(cand):
                cand.update(jj for _, jj in current[j])
                cand.update(reverse[j])
            cand.discard(i)
            ranked = sorted(((score(i, j), j) for j in cand),
                            key=lambda t: (-t[0], t[1]))[:k]
            if [j for _, j in ranked] != [j for _, j in current[i]]:
                before = set(j for _, j in current[i])
                updates += len([j for _, j in ranked if j not in before])
                current[i] = ranked
        if total_slots and updates / total_slots < (1.0 - delta):
            break
    return current


def knn_write(graph: PropertyGraph, cfg: KnnConfig) -> KnnStats:
    """Find each in-scope node's topK most similar peers and write edges.

    Exact mode is brute force over all pairs and applies deltaThreshold as
    a score cutoff; approximate mode runs neighbor-list descent seeded by
    randomSeed and uses deltaThreshold as the convergence fraction.
    """
    cfg.validate()
    ids, m = _scoped_vectors(graph, cfg.nodeProperty, cfg.labelFilter)
    n = len(ids)
    if n == 0:
        return KnnStats(0, 0, 0.0)

    if cfg.mode == "exact":
        S = _score_matrix(m, cfg.metric)
        topk = _exact_topk(S, cfg.topK)
        pairs = [(i, j, S[i, j]) for i in range(n) for j in topk[i]
                 if S[i, j] >= cfg.deltaThreshold]
    else:
        if cfg.metric == "cosine":
            norms = np.linalg.norm(m, axis=1)
            if np.any(norms == 0):
                raise ValidationError(
                    "cosine similarity undefined for zero vector")
            mn = m / norms[:, None]

            def pair_score(i, j):
                return (float(np.clip(mn[i] @ mn[j], -1.0, 1.0)) + 1.0) / 2.0
        else:
            def pair_score(i, j):
                return 1.0 / (1.0 + float(np.linalg.norm(m[i] - m[j])))

        rng = np.random.default_rng(cfg.randomSeed)
        lists = _nn_descent(pair_score, n, cfg.topK, cfg.deltaThreshold, rng)
        pairs = [(i, j, s) for i in range(n) for s, j in lists[i]]

    written = 0
    score_sum = 0.0
    for i, j, s in pairs:
        graph.add_edge(cfg.writeRelationshipType, ids[i], ids[j],
                       {cfg.writeProperty: float(s)})
        written += 1
        score_sum += float(s)
    mean = score_sum / written if written else 0.0
    return KnnStats(nodesCompared=n, relationshipsWritten=written,
                    meanSimilarity=mean)


def top_k_similar(graph: PropertyGraph, anchor: int, k: int, prop: str,
                  label_filter: str | None = None,
                  metric: str = "cosine") -> list:
    """Ranked (node id, score) list for the k nodes most similar to anchor.

    Cross-label comparison is permitted when dimensions match; the anchor
    itself is always excluded.  Ties break by ascending node id.
    """
    if k < 0:
        raise ConfigError(f"k must be >= 0, got {k}")
    anchor_vec = graph.node(anchor).properties.get(prop)
    if not isinstance(anchor_vec, list):
        raise PropertyError(f"anchor {anchor} missing vector property {prop!r}")
    a = np.asarray(anchor_vec, dtype=np.float64)
    if label_filter is not None:
        cand = graph.nodes_with_label(label_filter)
    else:
        cand = sorted(graph.nodes)
    scored = []
    for nid in cand:
        if nid == anchor:
            continue
        v = graph.nodes[nid].properties.get(prop)
        if not isinstance(v, list):
            continue
        if len(v) != a.shape[0]:
            raise DimensionError(
                f"candidate {nid}: dimension {len(v)} != anchor {a.shape[0]}")
        scored.append((nid, to_score(similarity(a, v, metric), metric)))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]
