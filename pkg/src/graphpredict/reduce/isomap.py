"""Isomap: geodesics over a symmetrized k-NN graph, then classical MDS."""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from ..errors import ConfigError, ConnectivityError
from .base import as_points
from .mds import mds_classical


def pairwise_euclidean(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
    D = np.sqrt(d2)
    np.fill_diagonal(D, 0.0)
    return (D + D.T) / 2.0


def knn_edges(D: np.ndarray, k: int) -> np.ndarray:
    """Boolean adjacency of the symmetrized (union) k-NN graph."""
    n = D.shape[0]
    A = np.zeros((n, n), dtype=bool)
    for i in range(n):
        order = np.lexsort((np.arange(n), D[i]))
        picked = [j for j in order if j != i][:k]
        A[i, picked] = True
    return A | A.T


def _check_connected(A: np.ndarray, context: str):
    ncomp, labels = connected_components(csr_matrix(A), directed=False)
    if ncomp > 1:
        sizes = sorted((int(np.sum(labels == c)) for c in range(ncomp)),
                       reverse=True)
        raise ConnectivityError(
            f"{context}: neighborhood graph has {ncomp} components "
            f"(sizes {sizes})", component_sizes=sizes)


def isomap(vectors, k_neighbors: int = 10, out_dim: int = 2):
    ids, X = as_points(vectors)
    n = X.shape[0]
    if k_neighbors < 1:
        raise ConfigError(f"k_neighbors must be >= 1, got {k_neighbors}")
    if n <= k_neighbors:
        raise ConfigError(f"need n > k_neighbors, got n={n}, k={k_neighbors}")
    D = pairwise_euclidean(X)
    A = knn_edges(D, k_neighbors)
    _check_connected(A, "isomap")
    W = np.where(A, D, 0.0)
    geo = shortest_path(csr_matrix(W), method="D", directed=False)
    geo = (geo + geo.T) / 2.0
    red = mds_classical(geo, out_dim=out_dim, ids=ids)
    red.method = "isomap"
    red.diagnostics["k_neighbors"] = k_neighbors
    return red
