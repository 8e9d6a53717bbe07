import io
import math

import pytest

from graphpredict.errors import NodeNotFoundError, SchemaError, ValidationError
from graphpredict.graph import PropertyGraph
from graphpredict.schema import (
    HEART_EDGE_TYPES,
    heart_map,
    ingest_csv,
    movielens_ratings_map,
    movies_in_genres,
)

from conftest import FIG1_RATINGS, make_heart_csv


def test_ratings_ingest_counts(fig1_graph):
    g = fig1_graph
    assert len(g) == 7                       # 3 users + 4 movies
    assert g.num_edges() == 6
    assert g.labels() == ["Movie", "User"]
    assert g.edge_types() == ["RATED"]


def test_ratings_multiset_and_sum(fig1_graph):
    ratings = sorted(fig1_graph.edges[e].properties["rating"]
                     for e in fig1_graph.edges_with_type("RATED"))
    assert ratings == [1.0, 2.0, 3.0, 4.0, 4.0, 5.0]
    assert sum(ratings) == 19.0
    assert abs(sum(ratings) / len(ratings) - 19 / 6) < 1e-12


def test_neighbors_directions(fig1_graph):
    g = fig1_graph
    bob = g.find_node("User", "userId", "Bob")
    hobbit = g.find_node("Movie", "movieId", "TheHobbit")
    lfr = g.find_node("Movie", "movieId", "TheLFR")
    assert g.neighbors(bob, "RATED", "out") == sorted([hobbit, lfr])
    assert g.neighbors(bob, "RATED", "in") == []
    # undirected view of a movie reaches its raters
    alice = g.find_node("User", "userId", "Alice")
    assert g.neighbors(lfr, None, "undirected") == sorted([bob, alice])


def test_neighbors_unknown_node(fig1_graph):
    with pytest.raises(NodeNotFoundError):
        fig1_graph.neighbors(999)


def test_set_node_property_roundtrip(fig1_graph):
    g = fig1_graph
    nid = g.nodes_with_label("Movie")[0]
    vec = [float(i) for i in range(10)]
    g.set_node_property(nid, "fastRP_embedding", vec)
    assert g.nodes[nid].properties["fastRP_embedding"] == vec
    # upsert with a different dimension is allowed at graph level
    g.set_node_property(nid, "fastRP_embedding", [1.0] * 50)
    assert len(g.nodes[nid].properties["fastRP_embedding"]) == 50


def test_vector_property_validation(fig1_graph):
    nid = fig1_graph.nodes_with_label("Movie")[0]
    with pytest.raises(ValidationError):
        fig1_graph.set_node_property(nid, "v", [1.0, math.nan])
    with pytest.raises(ValidationError):
        fig1_graph.set_node_property(nid, "v", [])
    with pytest.raises(ValidationError):
        fig1_graph.set_node_property(nid, "v", math.inf)


def test_audit_clean_after_mutations(fig1_graph):
    g = fig1_graph
    nid = g.add_node("User", {"userId": "Zed"})
    g.add_edge("RATED", nid, g.nodes_with_label("Movie")[0], {"rating": 3.0})
    assert g.audit() == []


def test_json_roundtrip_lossless(fig1_graph):
    g = fig1_graph
    g.set_node_property(g.nodes_with_label("Movie")[0], "vec", [0.5, -1.5])
    text = g.to_json()
    g2 = PropertyGraph.from_json(text)
    assert g2.to_json() == text
    assert g2.audit() == []


def test_ingest_idempotent_structure():
    a, _ = ingest_csv(io.StringIO(FIG1_RATINGS), movielens_ratings_map())
    b, _ = ingest_csv(io.StringIO(FIG1_RATINGS), movielens_ratings_map())
    assert a.to_json() == b.to_json()


def test_missing_column_raises():
    bad = "userId,movieId\nu1,m1\n"
    with pytest.raises(SchemaError) as exc:
        ingest_csv(io.StringIO(bad), movielens_ratings_map())
    assert "rating" in str(exc.value)


def test_bad_rows_dropped_and_counted():
    text = ("userId,movieId,rating,timestamp\n"
            "u1,m1,4.0,0\n"
            "u2,m2,not-a-number,0\n"
            "u3,m3,9.5,0\n")          # out of the [0.5, 5] range
    g, rep = ingest_csv(io.StringIO(text), movielens_ratings_map())
    assert rep.rows_read == 3
    assert rep.rows_kept == 1
    assert rep.rows_dropped == 2
    assert g.num_edges() == 1
    # dropped rows contribute no nodes either (atomic drop)
    assert g.find_node("User", "userId", "u2") is None


def test_header_only_csv_warns():
    g, rep = ingest_csv(io.StringIO("userId,movieId,rating,timestamp\n"),
                        movielens_ratings_map())
    assert len(g) == 0
    assert rep.rows_read == 0
    assert rep.warnings


def test_heart_row_fanout():
    g, rep = ingest_csv(io.StringIO(make_heart_csv(1, seed=3)), heart_map())
    assert rep.rows_kept == 1
    assert len(g) == 6
    assert g.num_edges() == 5
    assert sorted(g.edge_types()) == sorted(HEART_EDGE_TYPES)
    person = g.nodes_with_label("Person")[0]
    # exactly one satellite per edge type
    for t in HEART_EDGE_TYPES:
        assert len(g.neighbors(person, t, "out")) == 1
    fs = g.neighbors(person, "hasFS", "out")[0]
    assert set(g.nodes[fs].properties) == {"type", "value"}


def test_heart_star_invariant():
    g, _ = ingest_csv(io.StringIO(make_heart_csv(20, seed=9)), heart_map())
    assert len(g) == 20 * 6
    assert g.num_edges() == 20 * 5
    for pid in g.nodes_with_label("Person"):
        assert len(g.incident_edges(pid, None, "out")) == 5
        assert g.incident_edges(pid, None, "in") == []


def test_genre_split_and_retrieval(fig1_graph_with_movies):
    g = fig1_graph_with_movies
    assert set(g.labels()) == {"User", "Movie", "Genre"}
    genres = {g.nodes[n].properties["name"] for n in g.nodes_with_label("Genre")}
    assert genres == {"Adventure", "Fantasy", "Drama", "Thriller"}
    for mid in g.nodes_with_label("Movie"):
        g.set_node_property(mid, "graphsage_embedding", [1.0, 2.0])
    rows = movies_in_genres(g, ["Drama", "Fantasy"], "graphsage_embedding")
    assert [(r[0], r[2]) for r in rows] == [
        ("Anatomy of a Fall", "Drama"),
        ("Mother's Instinct", "Drama"),
        ("The Hobbit", "Fantasy"),
        ("The Lord of the Rings", "Fantasy"),
    ]
    assert all(r[1] == [1.0, 2.0] for r in rows)


def test_find_node_lowest_id():
    g = PropertyGraph()
    a = g.add_node("X", {"k": "same"})
    g.add_node("X", {"k": "same"})
    assert g.find_node("X", "k", "same") == a
    assert g.find_node("X", "k", "missing") is None
