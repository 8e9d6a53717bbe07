"""Predictive queries: rating prediction, class separation, query quality."""

from __future__ import annotations

import csv
import decimal
import io
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ClassError, ConfigError, NodeNotFoundError
from .graph import PropertyGraph

EXACT_MATCH_EPS = 0.005  # |difference| below this counts as an exact hit


@dataclass
class PredictionRow:
    userId: str
    movieId: str
    title: str
    prediction_rating: Optional[float]
    real_rating: Optional[float]
    difference: Optional[float]          # real - prediction, unrounded
    covered: bool = True


@dataclass
class PredictionReport:
    rows: list
    threshold: float
    count_abs_diff_ge_threshold: int
    exact_matches: int
    mean_abs_difference: Optional[float]

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "rows": len(self.rows),
            "count_abs_diff_ge_threshold": self.count_abs_diff_ge_threshold,
            "exact_matches": self.exact_matches,
            "mean_abs_difference": self.mean_abs_difference,
        }


def _user_node(graph, user_id):
    nid = graph.find_node("User", "userId", user_id)
    if nid is None:
        raise NodeNotFoundError(f"no User with userId={user_id!r}")
    return nid


def _movie_node(graph, movie_id):
    nid = graph.find_node("Movie", "movieId", movie_id)
    if nid is None:
        raise NodeNotFoundError(f"no Movie with movieId={movie_id!r}")
    return nid


def _rating_of(graph, user_node, movie_node):
    """First RATED edge user -> movie (lowest edge id), or None."""
    for eid in graph.incident_edges(user_node, "RATED", "out"):
        e = graph.edges[eid]
        if e.target == movie_node:
            return float(e.properties.get("rating"))
    return None


def predict_ratings(graph: PropertyGraph, user_ids, movie_ids) -> list:
    """Mean of similar users' ratings for every (user, movie) pair.

    For each pair, the prediction averages r.rating over distinct similar
    users u' (u -SIMILAR-> u' -RATED-> m).  Duplicate SIMILAR edges to the
    same u' contribute once.  Pairs with no similar rater are emitted
    uncovered rather than dropped.
    """
    rows = []
    for uid in user_ids:
        u = _user_node(graph, uid)
        sims = graph.neighbors(u, "SIMILAR", "out")   # distinct by contract
        for mid in movie_ids:
            m = _movie_node(graph, mid)
            title = str(graph.nodes[m].properties.get("title", mid))
            ratings = []
            for s in sims:
                r = _rating_of(graph, s, m)
                if r is not None:
                    ratings.append(r)
            real = _rating_of(graph, u, m)
            if ratings:
                pred = sum(ratings) / len(ratings)
                diff = real - pred if real is not None else None
                rows.append(PredictionRow(uid, mid, title, pred, real, diff))
            else:
                rows.append(PredictionRow(uid, mid, title, None, real, None,
                                          covered=False))
    return rows


def prediction_report(rows, threshold: float = 1.0) -> PredictionReport:
    diffs = [r.difference for r in rows if r.difference is not None]
    count = sum(1 for d in diffs if abs(d) >= threshold)
    exact = sum(1 for d in diffs if abs(d) < EXACT_MATCH_EPS)
    mean = sum(abs(d) for d in diffs) / len(diffs) if diffs else None
    return PredictionReport(rows=list(rows), threshold=threshold,
                            count_abs_diff_ge_threshold=count,
                            exact_matches=exact, mean_abs_difference=mean)


def _render2(value: float) -> str:
    """Two decimals, halves away from zero (so 4.125 -> '4.13')."""
    q = decimal.Decimal(repr(value)).quantize(decimal.Decimal("0.01"),
                                              rounding=decimal.ROUND_HALF_UP)
    return "0.00" if q == 0 else str(q)


def rows_to_csv(rows) -> str:
    """Table-shaped CSV with 2-decimal rendering; uncovered cells are empty."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["userId", "movie", "title", "prediction_rating",
                "real_rating", "difference"])
    for r in rows:
        w.writerow([
            r.userId, r.movieId, r.title,
            "" if r.prediction_rating is None else _render2(r.prediction_rating),
            "" if r.real_rating is None else _render2(r.real_rating),
            "" if r.difference is None else _render2(r.difference),
        ])
    return out.getvalue()


def report_to_json(report: PredictionReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":"))


def silhouette(X: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette coefficient under euclidean distance."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ClassError("silhouette requires at least two classes")
    for c in classes:
        if np.sum(labels == c) < 2:
            raise ClassError(f"class {c!r} has fewer than 2 points")
    sq = np.sum(X * X, axis=1)
    D = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0))
    n = X.shape[0]
    scores = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        a = D[i, same].sum() / (same.sum() - 1) if same.sum() > 1 else 0.0
        b = min(D[i, labels == c].mean() for c in classes if c != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())


def disease_separation(embeddings, targets: dict) -> float:
    """Silhouette of the two target classes in embedding space, in [-1, 1]."""
    ids = embeddings.node_ids()
    missing = [nid for nid in ids if nid not in targets]
    if missing:
        raise ClassError(f"nodes without a target label: {missing}")
    _, X = embeddings.matrix()
    y = np.array([targets[nid] for nid in ids])
    return silhouette(X, y)


def query_quality(graph: PropertyGraph, user_ids, movie_ids) -> float:
    """Fraction of (user, movie) targets answerable from graph structure.

    A target is covered when at least one SIMILAR neighbor of the user has
    a RATED edge to the movie.  Rating values are never read.
    """
    pairs = [(u, m) for u in user_ids for m in movie_ids]
    if not pairs:
        raise ConfigError("degenerate query: empty target set")
    covered = 0
    for uid, mid in pairs:
        u = _user_node(graph, uid)
        m = _movie_node(graph, mid)
        for s in graph.neighbors(u, "SIMILAR", "out"):
            if any(graph.edges[eid].target == m
                   for eid in graph.incident_edges(s, "RATED", "out")):
                covered += 1
                break
    return covered / len(pairs)
