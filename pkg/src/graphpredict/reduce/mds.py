"""Classical (Torgerson) multidimensional scaling."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .base import make_reduction
from .eigen import symmetric_eigen


def validate_distance_matrix(D) -> np.ndarray:
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError(f"distance matrix must be square, got {D.shape}")
    if np.max(np.abs(D - D.T)) > 1e-9:
        raise ValidationError("distance matrix not symmetric within 1e-9")
    if np.max(np.abs(np.diag(D))) > 1e-9:
        raise ValidationError("distance matrix diagonal not zero")
    if np.min(D) < 0:
        raise ValidationError("distance matrix has negative entries")
    return D


def mds_embedding(vectors, out_dim: int = 2):
    """Classical MDS over the euclidean distances of an embedding set."""
    from .base import as_points
    from .isomap import pairwise_euclidean
    ids, X = as_points(vectors)
    return mds_classical(pairwise_euclidean(X), out_dim=out_dim, ids=ids)


def mds_classical(d, out_dim: int = 2, ids=None):
    """Double-center the squared distances and keep the top eigenpairs.

    Non-positive eigenvalues map to zero columns.  Diagnostics report the
    fraction of positive eigenmass the kept pairs capture.
    """
    D = validate_distance_matrix(d)
    n = D.shape[0]
    if n < 3:
        raise ValidationError(f"classical MDS needs n >= 3, got {n}")
    if ids is None:
        ids = list(range(n))
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (D * D) @ J
    w, V = symmetric_eigen(B)
    coords = np.zeros((n, out_dim))
    for j in range(min(out_dim, n)):
        if w[j] > 0:
            coords[:, j] = V[:, j] * np.sqrt(w[j])
    pos_mass = np.sum(w[w > 0])
    kept = np.sum(np.clip(w[:out_dim], 0.0, None))
    diagnostics = {
        "positive_eigenmass_fraction": float(kept / pos_mass) if pos_mass > 0 else 1.0,
        "eigenvalues_top": [float(x) for x in w[:out_dim]],
    }
    return make_reduction("mds", ids, coords, diagnostics)
