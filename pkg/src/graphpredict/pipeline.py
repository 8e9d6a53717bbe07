"""Config-driven orchestration of the seven-step pipeline.

Every stage is a standalone function over (config, output directory) so
the CLI subcommands and `run_pipeline` share one implementation; composing
subcommands manually therefore reproduces `run_pipeline` byte-for-byte in
deterministic modes.
"""

from __future__ import annotations

import hashlib
import json
import os
import time

from .embedding import EmbeddingConfig, EmbeddingSet, run_method, write_embeddings
from .embedding.config import PROPERTY_NAMES
from .errors import (
    GraphPredictError,
    PipelineValidationError,
    StageError,
)
from .graph import PropertyGraph
from .predict import (
    predict_ratings,
    prediction_report,
    query_quality,
    report_to_json,
    rows_to_csv,
)
from .projection import ProjectionSpec, builtin_projection, project
from .reduce import REDUCERS, reduction_to_csv
from .schema import SchemaMap, builtin_map, ingest_csv
from .similarity import KnnConfig, knn_write
from .viz import ScatterSpec, scatter_svg

STAGES = ["ingest", "project", "embed", "knn", "reduce", "plot",
          "predict", "quality"]

OUTPUT_ENV_VAR = "GRAPHPREDICT_OUT"


# -- config handling --------------------------------------------------------

def load_config(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def _projection_spec(entry: dict, dataset_kind: str) -> ProjectionSpec:
    if "spec" in entry:
        return ProjectionSpec.from_dict(entry["spec"])
    return builtin_projection(entry["kind"], dataset_kind)


def _cell_name(projection: str, method: str, dimension: int) -> str:
    return f"{projection}_{method}_{dimension}"


def embedding_grid(config: dict) -> list:
    """All (projection spec, EmbeddingConfig, cell name) combinations."""
    kind = config["dataset"]["kind"]
    cells = []
    for proj_entry in config.get("projections", []):
        spec = _projection_spec(proj_entry, kind)
        for emb in config.get("embeddings", []):
            cfg = EmbeddingConfig(method=emb["method"],
                                  dimension=emb.get("dimension", 10),
                                  seed=emb.get("seed", 42),
                                  params=dict(emb.get("params", {})))
            cells.append((spec, cfg, _cell_name(spec.name, cfg.method,
                                                cfg.dimension)))
    return cells


def _resolve_cell(ref: dict, cells, field: str) -> str:
    name = _cell_name(ref["projection"], ref["method"], ref["dimension"])
    if name not in {c for _, _, c in cells}:
        raise PipelineValidationError(
            field, f"references undeclared embedding cell {name!r}")
    return name


def validate_config(config: dict) -> None:
    """Structural and cross-reference checks; raises before any work."""
    ds = config.get("dataset")
    if not isinstance(ds, dict) or "kind" not in ds:
        raise PipelineValidationError("dataset", "missing or lacks 'kind'")
    if ds["kind"] not in ("heart", "movielens", "generic"):
        raise PipelineValidationError("dataset.kind",
                                      f"unknown kind {ds['kind']!r}")
    if ds["kind"] == "movielens":
        if "ratings" not in ds:
            raise PipelineValidationError("dataset.ratings", "missing path")
    elif "path" not in ds:
        raise PipelineValidationError("dataset.path", "missing path")

    try:
        cells = embedding_grid(config)
        for _, cfg, _ in cells:
            cfg.resolved()
    except GraphPredictError as exc:
        raise PipelineValidationError("embeddings", str(exc)) from exc

    if "knn" in config:
        knn = config["knn"]
        if "embedding" in knn:
            _resolve_cell(knn["embedding"], cells, "knn.embedding")
        elif "nodeProperty" not in knn:
            raise PipelineValidationError(
                "knn", "needs 'embedding' cell or explicit 'nodeProperty'")
        _make_knn_config(config).validate()

    for i, red in enumerate(config.get("reductions", [])):
        if red.get("method") not in REDUCERS:
            raise PipelineValidationError(
                f"reductions[{i}].method", f"unknown method {red.get('method')!r}")
        emb = red.get("embedding", "all")
        if emb != "all":
            _resolve_cell(emb, cells, f"reductions[{i}].embedding")

    queries = config.get("queries", {})
    rp = queries.get("rating_prediction")
    if rp is not None and (not rp.get("users") or not rp.get("movies")):
        raise PipelineValidationError(
            "queries.rating_prediction", "needs non-empty users and movies")
    sep = queries.get("disease_separation")
    if sep is not None and "embedding" in sep:
        _resolve_cell(sep["embedding"], cells,
                      "queries.disease_separation.embedding")


# -- artifact helpers -------------------------------------------------------

def _write(out_dir: str, rel: str, text: str) -> str:
    path = os.path.join(out_dir, rel)
    os.makedirs(os.path.dirname(path) or out_dir, exist_ok=True)
    with open(path, "w") as f:
        f.write(text)
    return rel

def _read(out_dir: str, rel: str) -> str:
    with open(os.path.join(out_dir, rel)) as f:
        return f.read()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_graph(out_dir: str, prefer_knn: bool = False) -> PropertyGraph:
    for name in (["graph_knn.json", "graph.json"] if prefer_knn
                 else ["graph.json"]):
        path = os.path.join(out_dir, name)
        if os.path.exists(path):
            with open(path) as f:
                return PropertyGraph.from_json(f.read())
    raise FileNotFoundError(f"no graph dump under {out_dir}; run ingest first")


# -- stages -----------------------------------------------------------------

def stage_ingest(config: dict, out_dir: str) -> dict:
    ds = config["dataset"]
    graph = None
    reports = {}
    if ds["kind"] == "heart":
        graph, rep = ingest_csv(ds["path"], builtin_map("heart"))
        reports["heart"] = rep
    elif ds["kind"] == "movielens":
        graph, rep = ingest_csv(ds["ratings"], builtin_map("movielens_ratings"))
        reports["ratings"] = rep
        if "movies" in ds:
            graph, rep = ingest_csv(ds["movies"],
                                    builtin_map("movielens_movies"), graph)
            reports["movies"] = rep
    else:
        smap_doc = ds["schema_map"]
        smap = SchemaMap(**smap_doc) if isinstance(smap_doc, dict) else smap_doc
        graph, rep = ingest_csv(ds["path"], smap)
        reports["data"] = rep
    artifacts = [
        _write(out_dir, "graph.json", graph.to_json() + "\n"),
        _write(out_dir, "cleaning_report.json", _json({
            name: {"rows_read": r.rows_read, "rows_kept": r.rows_kept,
                   "rows_dropped": r.rows_dropped,
                   "drop_reasons": r.drop_reasons, "warnings": r.warnings}
            for name, r in reports.items()})),
    ]
    stats = {"nodes": len(graph), "edges": graph.num_edges(),
             "cleaning": {k: r.summary() for k, r in reports.items()}}
    return {"artifacts": artifacts, "stats": stats}


def stage_project(config: dict, out_dir: str) -> dict:
    graph = _load_graph(out_dir)
    kind = config["dataset"]["kind"]
    artifacts, stats = [], {}
    for entry in config.get("projections", []):
        spec = _projection_spec(entry, kind)
        view = project(graph, spec)
        artifacts.append(_write(out_dir, f"{spec.name}.projection.json",
                                _json(spec.to_dict())))
        stats[spec.name] = {"nodes": view.num_nodes, "edges": view.num_edges}
    return {"artifacts": artifacts, "stats": stats}


def stage_embed(config: dict, out_dir: str, seed_override=None) -> dict:
    graph = _load_graph(out_dir)
    artifacts, stats = [], {}
    views = {}
    for spec, cfg, cell in embedding_grid(config):
        if spec.name not in views:
            views[spec.name] = project(graph, spec)
        view = views[spec.name]
        if seed_override is not None:
            cfg.seed = seed_override
        eset = run_method(view, cfg)
        labels = {nid: view.label_of(nid) for nid in view.node_ids}
        artifacts.append(_write(out_dir, f"{cell}.embedding.csv",
                                eset.to_csv(labels)))
        artifacts.append(_write(out_dir, f"{cell}.provenance.json",
                                eset.provenance_json() + "\n"))
        stats[cell] = {"nodes": len(eset), "dimension": eset.dimension}
    return {"artifacts": artifacts, "stats": stats}


def _make_knn_config(config: dict, seed_override=None) -> KnnConfig:
    knn = dict(config.get("knn", {}))
    if "embedding" in knn:
        method = knn["embedding"]["method"]
        knn.setdefault("nodeProperty", PROPERTY_NAMES[method])
    cfg = KnnConfig(
        topK=knn.get("topK", 5),
        nodeProperty=knn.get("nodeProperty", "graphsage_embedding"),
        metric=knn.get("metric", "cosine"),
        deltaThreshold=knn.get("deltaThreshold", 0.7),
        randomSeed=(seed_override if seed_override is not None
                    else knn.get("randomSeed", 42)),
        writeRelationshipType=knn.get("writeRelationshipType", "SIMILAR"),
        writeProperty=knn.get("writeProperty", "score"),
        mode=knn.get("mode", "exact"),
        labelFilter=knn.get("labelFilter"),
    )
    return cfg


def stage_knn(config: dict, out_dir: str, seed_override=None) -> dict:
    graph = _load_graph(out_dir)
    knn = config["knn"]
    if "embedding" in knn:
        cells = embedding_grid(config)
        cell = _resolve_cell(knn["embedding"], cells, "knn.embedding")
        text = _read(out_dir, f"{cell}.embedding.csv")
        prov = json.loads(_read(out_dir, f"{cell}.provenance.json"))
        eset = EmbeddingSet.from_csv(text, provenance=prov)
        write_embeddings(graph, eset)
    cfg = _make_knn_config(config, seed_override)
    stats = knn_write(graph, cfg)
    artifacts = [
        _write(out_dir, "graph_knn.json", graph.to_json() + "\n"),
        _write(out_dir, "knn_stats.json", _json(stats.to_dict())),
    ]
    return {"artifacts": artifacts, "stats": stats.to_dict()}


def _person_targets(graph: PropertyGraph) -> dict:
    """Person node -> DiseaseResult target via hasDisease edges."""
    targets = {}
    for pid in graph.nodes_with_label("Person"):
        for nid in graph.neighbors(pid, "hasDisease", "out"):
            t = graph.nodes[nid].properties.get("target")
            if t is not None:
                targets[pid] = int(t)
    return targets


def _reduction_jobs(config: dict):
    cells = embedding_grid(config)
    for i, red in enumerate(config.get("reductions", [])):
        emb = red.get("embedding", "all")
        if emb == "all":
            targets = [c for _, _, c in cells]
        else:
            targets = [_resolve_cell(emb, cells, f"reductions[{i}].embedding")]
        for cell in targets:
            yield red, cell


def stage_reduce(config: dict, out_dir: str, seed_override=None) -> dict:
    artifacts, stats = [], {}
    graph = None
    for red, cell in _reduction_jobs(config):
        method = red["method"]
        params = dict(red.get("params", {}))
        if seed_override is not None and method == "tsne":
            params["seed"] = seed_override
        text = _read(out_dir, f"{cell}.embedding.csv")
        eset = EmbeddingSet.from_csv(text)
        labels = EmbeddingSet.labels_from_csv(text)
        node_filter = red.get("node_filter")
        if node_filter:
            keep = {nid for nid, lab in labels.items() if lab == node_filter}
            eset = EmbeddingSet(eset.provenance,
                                {nid: v for nid, v in eset.vectors.items()
                                 if nid in keep})
        ids, X = eset.matrix()
        result = REDUCERS[method]((ids, X), **params)
        classes = {nid: labels.get(nid, "") for nid in ids}
        if red.get("classes") == "disease_target":
            if graph is None:
                graph = _load_graph(out_dir)
            targets = _person_targets(graph)
            classes = {nid: str(targets.get(nid, "")) for nid in ids}
        rel = f"{cell}_{method}.points.csv"
        artifacts.append(_write(out_dir, rel,
                                reduction_to_csv(result, labels, classes)))
        stats[rel] = {k: v for k, v in result.diagnostics.items()
                      if isinstance(v, (int, float, bool))}
    return {"artifacts": artifacts, "stats": stats}


def stage_plot(config: dict, out_dir: str) -> dict:
    artifacts = []
    for red, cell in _reduction_jobs(config):
        method = red["method"]
        rel_csv = f"{cell}_{method}.points.csv"
        points = []
        import csv as _csv
        import io as _io
        reader = _csv.reader(_io.StringIO(_read(out_dir, rel_csv)))
        next(reader)
        for row in reader:
            points.append((float(row[3]), float(row[4]), row[2] or row[1],
                           f"{row[1]} {row[0]}"))
        spec = ScatterSpec(title=f"{cell} / {method}", points=points)
        artifacts.append(_write(out_dir, f"{cell}_{method}.svg",
                                scatter_svg(spec)))
    return {"artifacts": artifacts, "stats": {}}


def stage_predict(config: dict, out_dir: str) -> dict:
    rp = config.get("queries", {}).get("rating_prediction")
    if rp is None:
        return {"artifacts": [], "stats": {"skipped": "no rating query"}}
    graph = _load_graph(out_dir, prefer_knn=True)
    rows = predict_ratings(graph, rp["users"], rp["movies"])
    report = prediction_report(rows, threshold=rp.get("threshold", 1.0))
    artifacts = [
        _write(out_dir, "predictions.csv", rows_to_csv(rows)),
        _write(out_dir, "prediction_report.json", report_to_json(report) + "\n"),
    ]
    return {"artifacts": artifacts, "stats": report.to_dict()}


def stage_quality(config: dict, out_dir: str) -> dict:
    queries = config.get("queries", {})
    q = queries.get("quality")
    rp = queries.get("rating_prediction")
    if q is True or (q is None and rp is not None):
        q = rp
    if not q:
        return {"artifacts": [], "stats": {"skipped": "no quality query"}}
    graph = _load_graph(out_dir, prefer_knn=True)
    warnings = []
    if not graph.edges_with_type("SIMILAR"):
        warnings.append("no SIMILAR edges in graph; quality is 0.0")
        value = 0.0
    else:
        value = query_quality(graph, q["users"], q["movies"])
    doc = {"quality": value, "warnings": warnings}
    artifacts = [_write(out_dir, "quality.json", _json(doc))]
    return {"artifacts": artifacts, "stats": doc}


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "project": stage_project,
    "embed": stage_embed,
    "knn": stage_knn,
    "reduce": stage_reduce,
    "plot": stage_plot,
    "predict": stage_predict,
    "quality": stage_quality,
}

_SEEDED_STAGES = {"embed", "knn", "reduce"}


def _stage_enabled(name: str, config: dict) -> bool:
    if name in ("ingest",):
        return True
    if name == "project":
        return bool(config.get("projections"))
    if name == "embed":
        return bool(config.get("projections")) and bool(config.get("embeddings"))
    if name == "knn":
        return "knn" in config
    if name in ("reduce", "plot"):
        return bool(config.get("reductions"))
    if name == "predict":
        return config.get("queries", {}).get("rating_prediction") is not None
    if name == "quality":
        queries = config.get("queries", {})
        return bool(queries.get("quality")
                    or queries.get("rating_prediction"))
    return False


def run_pipeline(config: dict, out_dir: str, seed_override=None,
                 run_until: str | None = None,
                 deterministic: bool = True) -> dict:
    """Execute enabled stages in order; returns (and writes) the manifest."""
    validate_config(config)
    if run_until is not None and run_until not in STAGES:
        raise PipelineValidationError("stage", f"unknown stage {run_until!r}")
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "stages": [],
        "seed_override": seed_override,
        "deterministic": deterministic,
        "artifacts": {},
        "stats": {},
    }
    for name in STAGES:
        if not _stage_enabled(name, config):
            continue
        func = _STAGE_FUNCS[name]
        start = time.perf_counter()
        try:
            if name in _SEEDED_STAGES:
                result = func(config, out_dir, seed_override=seed_override)
            else:
                result = func(config, out_dir)
        except Exception as exc:
            manifest["stages"].append({
                "name": name, "status": "failed",
                "duration_s": time.perf_counter() - start,
                "artifacts": [], "error": str(exc),
            })
            _finalize_manifest(manifest, out_dir)
            raise StageError(name, exc) from exc
        manifest["stages"].append({
            "name": name, "status": "ok",
            "duration_s": time.perf_counter() - start,
            "artifacts": result["artifacts"],
        })
        manifest["stats"][name] = result["stats"]
        if run_until is not None and name == run_until:
            break
    _finalize_manifest(manifest, out_dir)
    return manifest


def _finalize_manifest(manifest: dict, out_dir: str) -> None:
    for stage in manifest["stages"]:
        for rel in stage["artifacts"]:
            manifest["artifacts"][rel] = sha256_file(os.path.join(out_dir, rel))
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, sort_keys=True, indent=1)
        f.write("\n")
