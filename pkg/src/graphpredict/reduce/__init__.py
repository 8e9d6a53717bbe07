"""2-D reductions (MDS, Isomap, Spectral, t-SNE) over embedding sets."""

from __future__ import annotations

import csv
import io

from .base import Reduction2D, make_reduction
from .eigen import symmetric_eigen
from .mds import mds_classical, mds_embedding, validate_distance_matrix
from .isomap import isomap
from .spectral import spectral_embedding, spectral_from_affinity
from .tsne import tsne


def reduction_to_csv(red: Reduction2D, labels: dict | None = None,
                     classes: dict | None = None) -> str:
    """`node_id, label, class, x, y` rows, the viz module's input format."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["node_id", "label", "class", "x", "y"])
    for nid in sorted(red.coordinates):
        x, y = red.coordinates[nid]
        w.writerow([nid, (labels or {}).get(nid, ""),
                    (classes or {}).get(nid, ""), repr(x), repr(y)])
    return out.getvalue()


REDUCERS = {"mds": mds_embedding, "isomap": isomap,
            "spectral": spectral_embedding, "tsne": tsne}

__all__ = [
    "Reduction2D", "make_reduction", "reduction_to_csv", "symmetric_eigen",
    "mds_classical", "mds_embedding", "validate_distance_matrix", "isomap",
    "spectral_embedding", "spectral_from_affinity", "tsne", "REDUCERS",
]
