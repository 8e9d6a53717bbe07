"""Unsupervised mean-aggregation embeddings over projected node features.

Input features come from the projection's declared numeric properties
(z-normalized per label, zero-padded to a common width); labels that
declare none fall back to [log(1 + degree)].  Each layer aggregates
(optionally capped) neighbor features, concatenates with self, applies a
learned linear map + rectifier, and L2-normalizes.  Training pulls
random-walk co-occurring pairs together and pushes negative samples apart.

Torch (CPU, single-threaded) supplies the autograd; everything is seeded.
"""

from __future__ import annotations

import numpy as np

from ..errors import DivergenceError, PropertyError
from .config import EmbeddingConfig, EmbeddingSet, make_provenance
from .node2vec import window_pairs, _unigram_table

_MAX_PAIRS_PER_EPOCH = 20000


def build_features(view, degree_fallback: bool = True):
    """Per-node input features; returns (ids, n x f float array)."""
    ids = view.node_ids
    labels = sorted({view.label_of(nid) for nid in ids})
    per_label = {}
    any_declared = False
    for label in labels:
        schema = view.feature_schema(label)
        members = [nid for nid in ids if view.label_of(nid) == label]
        if schema:
            any_declared = True
            cols = []
            for prop in schema:
                vals = []
                for nid in members:
                    v = view.source.nodes[nid].properties.get(prop)
                    if not isinstance(v, (int, float)) or isinstance(v, bool):
                        raise PropertyError(
                            f"node {nid} ({label}): property {prop!r} "
                            f"missing or not numeric")
                    vals.append(float(v))
                col = np.array(vals)
                std = col.std()
                cols.append((col - col.mean()) / std if std > 0
                            else np.zeros_like(col))
            per_label[label] = (members, np.stack(cols, axis=1))
        else:
            if not degree_fallback:
                raise PropertyError(
                    f"label {label!r} declares no numeric properties and "
                    f"degree fallback is disabled")
            col = np.array([np.log1p(view.degree(nid)) for nid in members])
            per_label[label] = (members, col[:, None])
    if not any_declared and not degree_fallback:
        raise PropertyError("no label declares numeric properties")
    width = max(m.shape[1] for _, m in per_label.values())
    index = {nid: i for i, nid in enumerate(ids)}
    X = np.zeros((len(ids), width))
    for members, m in per_label.values():
        for row, nid in enumerate(members):
            X[index[nid], :m.shape[1]] = m[row]
    return ids, X


def _capped_neighbors(view, ids, index, cap, rng):
    """Neighbor index lists, subsampled to `cap` when larger."""
    out = []
    for nid in ids:
        nbr = [index[m] for m in view.neighbors(nid)]
        if cap is not None and len(nbr) > cap:
            pick = sorted(rng.choice(len(nbr), size=cap, replace=False).tolist())
            nbr = [nbr[j] for j in pick]
        out.append(nbr)
    return out


def _mean_matrix(neighbor_lists, n, torch):
    rows, cols, vals = [], [], []
    for i, nbr in enumerate(neighbor_lists):
        for j in nbr:
            rows.append(i)
            cols.append(j)
            vals.append(1.0 / len(nbr))
    A = torch.zeros((n, n), dtype=torch.float64)
    if rows:
        A[rows, cols] = torch.tensor(vals, dtype=torch.float64)
    return A


def _normalize_rows(h, torch):
    norms = h.norm(dim=1, keepdim=True)
    return h / torch.clamp(norms, min=1e-12)


def _forward(X, A_layers, weights, torch):
    h = X
    for A, W in zip(A_layers, weights):
        agg = A @ h
        h = torch.relu(torch.cat([h, agg], dim=1) @ W)
        h = _normalize_rows(h, torch)
    return h


def forward_embeddings(view, features: np.ndarray, weight_mats) -> np.ndarray:
    """Untrained/explicit-weight forward pass (used by tests and inference)."""
    import torch
    ids = view.node_ids
    index = {nid: i for i, nid in enumerate(ids)}
    nbr = [[index[m] for m in view.neighbors(nid)] for nid in ids]
    A = _mean_matrix(nbr, len(ids), torch)
    X = torch.tensor(np.asarray(features, dtype=np.float64))
    Ws = [torch.tensor(np.asarray(W, dtype=np.float64)) for W in weight_mats]
    with torch.no_grad():
        h = _forward(X, [A] * len(Ws), Ws, torch)
    return h.numpy()


def _uniform_walks(view, walks_per_node, length, rng):
    ids = view.node_ids
    index = {nid: i for i, nid in enumerate(ids)}
    nbrs = [[index[m] for m in view.neighbors(nid)] for nid in ids]
    walks = []
    for _ in range(walks_per_node):
        for start in range(len(ids)):
            walk = [start]
            while len(walk) < length:
                cand = nbrs[walk[-1]]
                if not cand:
                    break
                walk.append(cand[rng.integers(len(cand))])
            walks.append(walk)
    return walks


def graphsage(view, cfg: EmbeddingConfig) -> EmbeddingSet:
    import torch
    params = cfg.resolved()
    torch.set_num_threads(1)
    rng = np.random.default_rng(cfg.seed)
    gen = torch.Generator().manual_seed(cfg.seed & 0x7FFFFFFF)

    ids, X_np = build_features(view, degree_fallback=params["degree_fallback"])
    n = len(ids)
    index = {nid: i for i, nid in enumerate(ids)}
    f = X_np.shape[1]
    dims = ([f] + [params["hidden_dim"]] * (params["layers"] - 1)
            + [cfg.dimension])

    caps = list(params["sample_sizes"] or [])
    A_layers = []
    for k in range(params["layers"]):
        cap = caps[k] if k < len(caps) else None
        nbr = _capped_neighbors(view, ids, index, cap, rng)
        A_layers.append(_mean_matrix(nbr, n, torch))

    weights = []
    for k in range(params["layers"]):
        fan_in, fan_out = 2 * dims[k], dims[k + 1]
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        W = (torch.rand((fan_in, fan_out), generator=gen, dtype=torch.float64)
             * 2 - 1) * bound
        W.requires_grad_(True)
        weights.append(W)

    X = torch.tensor(X_np, dtype=torch.float64)

    walks = _uniform_walks(view, params["walks_per_node"],
                           params["walk_length"], rng)
    centers, contexts = window_pairs(walks, params["window"])
    extra = {"training_pairs": int(centers.size)}
    loss_trace = []
    if centers.size == 0:
        extra["warning"] = "no co-occurrence pairs; forward pass of random weights"
    else:
        counts = np.bincount(np.concatenate([np.asarray(w) for w in walks]),
                             minlength=n)
        cum = _unigram_table(counts)
        k_neg = params["negatives"]
        opt = torch.optim.Adam(weights, lr=params["learning_rate"])
        logsig = torch.nn.functional.logsigmoid
        for epoch in range(params["epochs"]):
            if centers.size > _MAX_PAIRS_PER_EPOCH:
                sel = rng.choice(centers.size, size=_MAX_PAIRS_PER_EPOCH,
                                 replace=False)
            else:
                sel = np.arange(centers.size)
            u = torch.tensor(centers[sel])
            v = torch.tensor(contexts[sel])
            negs = torch.tensor(
                np.searchsorted(cum, rng.random((sel.size, k_neg))))
            opt.zero_grad()
            z = _forward(X, A_layers, weights, torch)
            pos_score = (z[u] * z[v]).sum(dim=1)
            neg_score = torch.einsum("bd,bkd->bk", z[u], z[negs])
            loss = -(logsig(pos_score).mean()
                     + logsig(-neg_score).sum(dim=1).mean())
            if not torch.isfinite(loss):
                raise DivergenceError("graphsage loss became non-finite",
                                      iteration=epoch)
            loss.backward()
            opt.step()
            loss_trace.append(float(loss.detach()))
        extra["loss_trace"] = loss_trace

    with torch.no_grad():
        z = _forward(X, A_layers, weights, torch).numpy()
    # Guarantee unit norms even if the rectifier zeroed a row.
    norms = np.linalg.norm(z, axis=1)
    dead = norms < 1e-12
    if dead.any():
        z[dead] = 1.0 / np.sqrt(cfg.dimension)
        z[dead] /= np.linalg.norm(z[dead], axis=1, keepdims=True)
    vectors = {nid: z[i] for i, nid in enumerate(ids)}
    return EmbeddingSet(make_provenance(view, cfg, **extra), vectors)
