"""Second-order biased random walks plus skip-gram negative sampling.

The walk bias follows the usual return/in-out parameterization: stepping
from `prev` to `cur`, a candidate `x` is weighted 1/p if x == prev, 1 if x
is adjacent to prev, and 1/q otherwise.  Training is plain SGD over
(center, context) window pairs with negative sampling, vectorized in
minibatches.  Everything draws from one seeded generator, so sequential
runs are bitwise reproducible.
"""

from __future__ import annotations

import numpy as np

from .config import EmbeddingConfig, EmbeddingSet, make_provenance

_BATCH = 2048
_MIN_ALPHA_FACTOR = 1e-4


def generate_walks(view, cfg: EmbeddingConfig, rng=None):
    """All biased walks as lists of node indices into view.node_ids."""
    p = cfg.resolved()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    ids = view.node_ids
    index = {nid: i for i, nid in enumerate(ids)}
    nbrs = [np.array([index[m] for m in view.neighbors(nid)], dtype=np.int64)
            for nid in ids]
    nbr_sets = [set(a.tolist()) for a in nbrs]
    length = p["walk_length"]
    inv_p, inv_q = 1.0 / p["p"], 1.0 / p["q"]
    uniform = p["p"] == 1.0 and p["q"] == 1.0
    walks = []
    for _ in range(p["walks_per_node"]):
        for start in range(len(ids)):
            walk = [start]
            while len(walk) < length:
                cur = walk[-1]
                cand = nbrs[cur]
                if cand.size == 0:
                    break
                if len(walk) == 1 or uniform:
                    nxt = cand[rng.integers(cand.size)]
                else:
                    prev = walk[-2]
                    prev_set = nbr_sets[prev]
                    w = np.empty(cand.size)
                    for j, x in enumerate(cand):
                        if x == prev:
                            w[j] = inv_p
                        elif x in prev_set:
                            w[j] = 1.0
                        else:
                            w[j] = inv_q
                    w /= w.sum()
                    nxt = cand[rng.choice(cand.size, p=w)]
                walk.append(int(nxt))
            walks.append(walk)
    return walks


def window_pairs(walks, window: int):
    """(center, context) index pairs for every position/offset in range."""
    centers, contexts = [], []
    for walk in walks:
        n = len(walk)
        for i in range(n):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(walk[i])
                    contexts.append(walk[j])
    return (np.array(centers, dtype=np.int64),
            np.array(contexts, dtype=np.int64))


def _unigram_table(counts: np.ndarray) -> np.ndarray:
    """Cumulative probabilities of the 3/4-power unigram distribution."""
    w = counts.astype(np.float64) ** 0.75
    if w.sum() == 0:
        w = np.ones_like(w)
    return np.cumsum(w / w.sum())


def node2vec(view, cfg: EmbeddingConfig) -> EmbeddingSet:
    params = cfg.resolved()
    rng = np.random.default_rng(cfg.seed)
    ids = view.node_ids
    n, dim = len(ids), cfg.dimension

    w_in = (rng.random((n, dim)) - 0.5) / dim
    w_out = np.zeros((n, dim))

    extra = {}
    if view.num_edges == 0:
        extra["warning"] = "all-isolated: no edges, vectors initialized only"
        vectors = {nid: w_in[i] for i, nid in enumerate(ids)}
        return EmbeddingSet(make_provenance(view, cfg, **extra), vectors)

    walks = generate_walks(view, cfg, rng)
    centers, contexts = window_pairs(walks, params["window"])
    total_pairs = centers.size
    extra["training_pairs"] = int(total_pairs)
    if total_pairs == 0:
        extra["warning"] = "no co-occurrence pairs; vectors initialized only"
        vectors = {nid: w_in[i] for i, nid in enumerate(ids)}
        return EmbeddingSet(make_provenance(view, cfg, **extra), vectors)

    counts = np.bincount(np.concatenate([w for w in map(np.asarray, walks)]),
                         minlength=n)
    cum = _unigram_table(counts)

    k = params["negatives"]
    lr0 = params["learning_rate"]
    epochs = params["epochs"]
    total_batches = epochs * ((total_pairs + _BATCH - 1) // _BATCH)
    batch_no = 0
    for _ in range(epochs):
        order = rng.permutation(total_pairs)
        for s in range(0, total_pairs, _BATCH):
            sel = order[s:s + _BATCH]
            c, t = centers[sel], contexts[sel]
            b = c.size
            negs = np.searchsorted(cum, rng.random((b, k)))
            alpha = lr0 * max(_MIN_ALPHA_FACTOR,
                              1.0 - batch_no / max(1, total_batches))
            batch_no += 1

            x = w_in[c]                       # (b, d)
            pos = w_out[t]                    # (b, d)
            neg = w_out[negs]                 # (b, k, d)
            g_pos = _sigmoid(np.einsum("bd,bd->b", x, pos)) - 1.0
            g_neg = _sigmoid(np.einsum("bd,bkd->bk", x, neg))

            grad_x = g_pos[:, None] * pos + np.einsum("bk,bkd->bd", g_neg, neg)
            np.add.at(w_in, c, -alpha * grad_x)
            np.add.at(w_out, t, -alpha * g_pos[:, None] * x)
            np.add.at(w_out, negs.ravel(),
                      (-alpha * g_neg[..., None] * x[:, None, :])
                      .reshape(-1, dim))

    vectors = {nid: w_in[i] for i, nid in enumerate(ids)}
    return EmbeddingSet(make_provenance(view, cfg, **extra), vectors)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -30, 30)))
