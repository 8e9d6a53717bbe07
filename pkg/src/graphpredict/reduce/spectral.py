"""Spectral embedding from the symmetric normalized Laplacian."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ConnectivityError
from .base import as_points, make_reduction
from .eigen import symmetric_eigen
from .isomap import knn_edges, pairwise_euclidean, _check_connected


def spectral_from_affinity(A, ids=None):
    """Coordinates from the 2nd/3rd smallest Laplacian eigenvectors.

    `A` is a symmetric binary (or nonnegative) affinity matrix of a
    connected graph.  Rows are rescaled by D^{-1/2}.
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    if ids is None:
        ids = list(range(n))
    _check_connected(A > 0, "spectral")
    d = A.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(d)
    L = np.eye(n) - (inv_sqrt[:, None] * A * inv_sqrt[None, :])
    w, V = symmetric_eigen(L)
    asc = np.argsort(w, kind="stable")          # smallest first
    idx = asc[[1, 2]]
    coords = (V[:, idx] * inv_sqrt[:, None])
    diagnostics = {
        "laplacian_eigenvalues_smallest": [float(w[asc[i]]) for i in range(3)],
    }
    return make_reduction("spectral", ids, coords, diagnostics)


def spectral_embedding(vectors, k_neighbors: int = 10, out_dim: int = 2):
    if out_dim != 2:
        raise ConfigError("spectral embedding emits 2-D coordinates only")
    ids, X = as_points(vectors)
    if k_neighbors < 1:
        raise ConfigError(f"k_neighbors must be >= 1, got {k_neighbors}")
    if X.shape[0] <= k_neighbors:
        raise ConfigError(f"need n > k_neighbors, got n={X.shape[0]}")
    A = knn_edges(pairwise_euclidean(X), k_neighbors).astype(np.float64)
    red = spectral_from_affinity(A, ids=ids)
    red.diagnostics["k_neighbors"] = k_neighbors
    return red
