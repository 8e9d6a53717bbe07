"""Tabular-to-graph schema maps and CSV ingestion.

A SchemaMap declares, per CSV, which node labels a row produces, how nodes
are keyed (natural-key column or per-row), which columns become properties,
and which edges tie the row's nodes together.  Rows that fail a required
conversion or range check are dropped and counted, never imputed.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import SchemaError
from .graph import PropertyGraph

_CONVERTERS = {
    "int": lambda s: int(float(s)) if float(s) == int(float(s)) else _bad(s),
    "float": float,
    "str": str,
}


def _bad(s):
    raise ValueError(f"not an integer: {s!r}")


@dataclass
class NodeRule:
    label: str
    key: Optional[str] = None          # natural-key column; None = per-row node
    properties: dict = field(default_factory=dict)   # property name -> column


@dataclass
class EdgeRule:
    type: str
    source: str                        # source node label
    target: str                        # target node label
    properties: dict = field(default_factory=dict)   # property name -> column


@dataclass
class SplitRule:
    """One column fans out into several keyed nodes (e.g. `genres` on `|`)."""
    column: str
    separator: str
    label: str
    key_property: str
    edge_type: str
    source: str                        # source node label for the fan-out edges
    skip_tokens: tuple = ()


@dataclass
class SchemaMap:
    kind: str                          # movielens | heart | generic
    node_rules: list = field(default_factory=list)
    edge_rules: list = field(default_factory=list)
    split_rules: list = field(default_factory=list)
    column_types: dict = field(default_factory=dict)   # column -> int|float|str
    ranges: dict = field(default_factory=dict)         # column -> (lo, hi)

    def referenced_columns(self) -> set:
        cols = set()
        for nr in self.node_rules:
            if nr.key is not None:
                cols.add(nr.key)
            cols.update(nr.properties.values())
        for er in self.edge_rules:
            cols.update(er.properties.values())
        for sr in self.split_rules:
            cols.add(sr.column)
        return cols

    def validate(self, header: Optional[list] = None) -> None:
        labels = {nr.label for nr in self.node_rules}
        for er in self.edge_rules:
            if er.source not in labels or er.target not in labels:
                raise SchemaError(
                    f"edge rule {er.type}: endpoint labels "
                    f"({er.source}, {er.target}) not all declared")
        for sr in self.split_rules:
            if sr.source not in labels:
                raise SchemaError(f"split rule {sr.column}: source label "
                                  f"{sr.source} not declared")
        if header is not None:
            missing = sorted(self.referenced_columns() - set(header))
            if missing:
                raise SchemaError(f"CSV header is missing columns: {missing}")


@dataclass
class CleaningReport:
    rows_read: int = 0
    rows_kept: int = 0
    rows_dropped: int = 0
    drop_reasons: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def summary(self) -> str:
        return (f"{self.rows_kept} rows kept, {self.rows_dropped} dropped "
                f"of {self.rows_read} read")


def _convert(value: str, typ: str):
    value = value.strip()
    if value == "":
        raise ValueError("empty field")
    return _CONVERTERS[typ](value)


def ingest_csv(source: Union[str, io.TextIOBase], smap: SchemaMap,
               graph: Optional[PropertyGraph] = None):
    """Ingest one CSV into a (possibly pre-existing) graph.

    `source` is a file path or an open text stream.  Returns
    (graph, CleaningReport).  Nodes are deduplicated by (label, key value);
    per-row labels get a fresh node each row.
    """
    if isinstance(source, str):
        stream = open(source, newline="")
        close = True
    else:
        stream = source
        close = False
    try:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None:
            raise SchemaError("CSV has no header row")
        smap.validate(header=list(reader.fieldnames))
        if graph is None:
            graph = PropertyGraph()
        report = CleaningReport()
        # (label, key value) -> node id, persists across rows for dedup
        keyed: dict = {}
        for idx, row in enumerate(reader):
            report.rows_read += 1
            try:
                _ingest_row(graph, smap, row, idx, keyed)
            except ValueError as exc:
                report.rows_dropped += 1
                reason = str(exc)
                report.drop_reasons[reason] = report.drop_reasons.get(reason, 0) + 1
                continue
            report.rows_kept += 1
        if report.rows_kept == 0:
            report.warnings.append("no usable rows; graph unchanged or empty")
        return graph, report
    finally:
        if close:
            stream.close()


def _ingest_row(graph, smap, row, idx, keyed):
    # First pass: convert every referenced value so a bad row drops atomically.
    converted = {}
    for col in smap.referenced_columns():
        if col in (sr.column for sr in smap.split_rules):
            converted[col] = row[col] if row[col] is not None else ""
            continue
        typ = smap.column_types.get(col, "str")
        try:
            value = _convert(row[col] if row[col] is not None else "", typ)
        except (ValueError, KeyError) as exc:
            raise ValueError(f"column {col}: {exc}")
        lo_hi = smap.ranges.get(col)
        if lo_hi is not None and not (lo_hi[0] <= value <= lo_hi[1]):
            raise ValueError(f"column {col}: {value} outside [{lo_hi[0]}, {lo_hi[1]}]")
        converted[col] = value

    row_nodes = {}
    for nr in smap.node_rules:
        if nr.key is None:
            nid = graph.add_node(nr.label, {p: converted[c] for p, c in nr.properties.items()})
        else:
            k = (nr.label, converted[nr.key])
            if k in keyed:
                nid = keyed[k]
            else:
                nid = graph.add_node(nr.label, {p: converted[c] for p, c in nr.properties.items()})
                keyed[k] = nid
        row_nodes[nr.label] = nid
    for er in smap.edge_rules:
        graph.add_edge(er.type, row_nodes[er.source], row_nodes[er.target],
                       {p: converted[c] for p, c in er.properties.items()})
    for sr in smap.split_rules:
        for token in converted[sr.column].split(sr.separator):
            token = token.strip()
            if not token or token in sr.skip_tokens:
                continue
            k = (sr.label, token)
            if k in keyed:
                tid = keyed[k]
            else:
                tid = graph.add_node(sr.label, {sr.key_property: token})
                keyed[k] = tid
            graph.add_edge(sr.edge_type, row_nodes[sr.source], tid)


# -- built-in schema maps ---------------------------------------------------

def movielens_ratings_map() -> SchemaMap:
    """ratings.csv (userId,movieId,rating,timestamp) -> User-RATED->Movie."""
    return SchemaMap(
        kind="movielens",
        node_rules=[
            NodeRule("User", key="userId", properties={"userId": "userId"}),
            NodeRule("Movie", key="movieId", properties={"movieId": "movieId"}),
        ],
        edge_rules=[
            EdgeRule("RATED", "User", "Movie", properties={"rating": "rating"}),
        ],
        column_types={"userId": "str", "movieId": "str", "rating": "float"},
        ranges={"rating": (0.5, 5.0)},
    )


def movielens_movies_map() -> SchemaMap:
    """movies.csv (movieId,title,genres) -> Movie-OF_GENRE->Genre."""
    return SchemaMap(
        kind="movielens",
        node_rules=[
            NodeRule("Movie", key="movieId",
                     properties={"movieId": "movieId", "title": "title"}),
        ],
        split_rules=[
            SplitRule(column="genres", separator="|", label="Genre",
                      key_property="name", edge_type="OF_GENRE", source="Movie",
                      skip_tokens=("(no genres listed)",)),
        ],
        column_types={"movieId": "str", "title": "str"},
    )


HEART_COLUMNS = ["age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
                 "thalach", "exang", "oldpeak", "slope", "ca", "thal", "target"]

HEART_EDGE_TYPES = ["hasState", "hasHeartMesures", "hasHeartExames",
                    "hasFS", "hasDisease"]

HEART_LABELS = ["Person", "PersonState", "HeartMeasures", "HeartExames",
                "FS", "DiseaseResult"]


def heart_map() -> SchemaMap:
    """heart.csv (14 columns): one Person plus five satellite nodes per row."""
    return SchemaMap(
        kind="heart",
        node_rules=[
            NodeRule("Person", properties={"age": "age", "gender": "sex"}),
            NodeRule("PersonState", properties={"cp": "cp", "thal": "thal"}),
            NodeRule("HeartMeasures",
                     properties={"thalach": "thalach", "trestbps": "trestbps"}),
            NodeRule("HeartExames",
                     properties={"ca": "ca", "exang": "exang", "oldpeak": "oldpeak",
                                 "restecg": "restecg", "slope": "slope"}),
            NodeRule("FS", properties={"type": "fbs", "value": "chol"}),
            NodeRule("DiseaseResult", properties={"target": "target"}),
        ],
        edge_rules=[
            EdgeRule("hasState", "Person", "PersonState"),
            EdgeRule("hasHeartMesures", "Person", "HeartMeasures"),
            EdgeRule("hasHeartExames", "Person", "HeartExames"),
            EdgeRule("hasFS", "Person", "FS"),
            EdgeRule("hasDisease", "Person", "DiseaseResult"),
        ],
        column_types={
            "age": "int", "sex": "int", "cp": "int", "trestbps": "float",
            "chol": "float", "fbs": "int", "restecg": "int", "thalach": "float",
            "exang": "int", "oldpeak": "float", "slope": "int", "ca": "int",
            "thal": "int", "target": "int",
        },
    )


def builtin_map(name: str) -> SchemaMap:
    maps = {
        "movielens_ratings": movielens_ratings_map,
        "movielens_movies": movielens_movies_map,
        "heart": heart_map,
    }
    if name not in maps:
        raise SchemaError(f"unknown builtin schema map {name!r}; "
                          f"choose from {sorted(maps)}")
    return maps[name]()


def movies_in_genres(graph: PropertyGraph, genres, embedding_property: str):
    """(title, embedding, genre) triples for movies in the given genres.

    Movies lacking the embedding property are skipped.  Rows are ordered by
    (genre, title) for determinism.
    """
    rows = []
    wanted = set(genres)
    for gid in graph.nodes_with_label("Genre"):
        gname = graph.nodes[gid].properties.get("name")
        if gname not in wanted:
            continue
        for mid in graph.neighbors(gid, "OF_GENRE", direction="in"):
            props = graph.nodes[mid].properties
            if embedding_property in props:
                rows.append((props.get("title", str(mid)),
                             props[embedding_property], gname))
    rows.sort(key=lambda r: (r[2], r[0]))
    return rows
