"""Shared result container for the 2-D reduction methods."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


@dataclass
class Reduction2D:
    method: str
    coordinates: dict                  # node id -> (x, y)
    diagnostics: dict = field(default_factory=dict)

    def points(self):
        """(ids, n x 2 array) in ascending node-id order."""
        ids = sorted(self.coordinates)
        return ids, np.array([self.coordinates[i] for i in ids])


def make_reduction(method, ids, coords, diagnostics=None) -> Reduction2D:
    coords = np.asarray(coords, dtype=np.float64)
    if not np.all(np.isfinite(coords)):
        raise ValidationError(f"{method}: non-finite coordinates")
    return Reduction2D(method=method,
                       coordinates={nid: (float(x), float(y))
                                    for nid, (x, y) in zip(ids, coords)},
                       diagnostics=dict(diagnostics or {}))


def as_points(vectors):
    """Accept an EmbeddingSet or (ids, matrix); return (ids, float matrix)."""
    if hasattr(vectors, "matrix"):
        return vectors.matrix()
    ids, X = vectors
    return list(ids), np.asarray(X, dtype=np.float64)
