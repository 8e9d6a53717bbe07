"""Sparse random projection embeddings via iterative neighbor averaging.

Base vectors use the very sparse projection distribution: entries are
{+s, 0, -s} with probabilities {1/6, 2/3, 1/6} and s = sqrt(3).  Each base
vector is a pure function of (seed, node id), so the result is the same
under any parallel execution order.
"""

from __future__ import annotations

import numpy as np

from .config import EmbeddingConfig, EmbeddingSet, make_provenance

_S = np.sqrt(3.0)


def base_vector(seed: int, node_id: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(
        np.random.SeedSequence([seed & 0xFFFFFFFF, node_id]))
    u = rng.random(dim)
    return np.where(u < 1 / 6, _S, np.where(u < 1 / 3, -_S, 0.0))


def _l2_rows(m: np.ndarray) -> np.ndarray:
    """Row-normalize; all-zero rows pass through unchanged."""
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return np.where(norms > 0, m / np.where(norms == 0, 1.0, norms), m)


def fastrp(view, cfg: EmbeddingConfig) -> EmbeddingSet:
    params = cfg.resolved()
    weights = params["iteration_weights"]
    beta = params["normalization_strength"]
    ids = view.node_ids
    n, dim = len(ids), cfg.dimension
    index = {nid: i for i, nid in enumerate(ids)}

    base = np.stack([base_vector(cfg.seed, nid, dim) for nid in ids]) \
        if n else np.zeros((0, dim))
    deg = np.array([view.degree(nid) for nid in ids], dtype=np.float64)
    if beta != 0.0:
        scale = np.where(deg > 0, deg, 1.0) ** beta
        base = base * scale[:, None]

    # Flat (row, neighbor) index pairs for vectorized mean aggregation.
    rows, cols = [], []
    for i, nid in enumerate(ids):
        for m in view.neighbors(nid):
            rows.append(i)
            cols.append(index[m])
    rows = np.array(rows, dtype=np.int64)
    cols = np.array(cols, dtype=np.int64)

    cur = _l2_rows(base)
    out = weights[0] * cur
    for w in weights[1:]:
        agg = np.zeros_like(cur)
        if rows.size:
            np.add.at(agg, rows, cur[cols])
        agg = np.where(deg[:, None] > 0, agg / np.where(deg == 0, 1.0, deg)[:, None],
                       cur)
        cur = _l2_rows(agg)
        out = out + w * cur

    vectors = {nid: out[i] for i, nid in enumerate(ids)}
    return EmbeddingSet(make_provenance(view, cfg), vectors)
