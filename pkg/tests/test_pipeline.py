import json
import os

import pytest

from graphpredict import cli, pipeline
from graphpredict.errors import PipelineValidationError, StageError

from conftest import FIG1_MOVIES, FIG1_RATINGS, make_heart_csv

SMALL_N2V = {"walk_length": 8, "walks_per_node": 3, "window": 2, "epochs": 1}
SMALL_SAGE = {"epochs": 2}


def write_heart_csv(tmp_path, rows=12, seed=5):
    path = tmp_path / "heart.csv"
    path.write_text(make_heart_csv(rows, seed=seed))
    return str(path)


def heart_config(tmp_path, **extra):
    cfg = {
        "dataset": {"kind": "heart", "path": write_heart_csv(tmp_path)},
        "projections": [{"kind": "full"}],
        "embeddings": [{"method": "fastrp", "dimension": 8, "seed": 42}],
    }
    cfg.update(extra)
    return cfg


def movielens_config(tmp_path, **extra):
    ratings = tmp_path / "ratings.csv"
    ratings.write_text(FIG1_RATINGS)
    movies = tmp_path / "movies.csv"
    movies.write_text(FIG1_MOVIES)
    cfg = {
        "dataset": {"kind": "movielens", "ratings": str(ratings),
                    "movies": str(movies)},
    }
    cfg.update(extra)
    return cfg


def out_files(out_dir):
    return sorted(f for f in os.listdir(out_dir) if f != "manifest.json")


def read_manifest(out_dir):
    with open(os.path.join(out_dir, "manifest.json")) as f:
        return json.load(f)


def test_ingest_only_manifest(tmp_path):
    cfg = {"dataset": {"kind": "heart", "path": write_heart_csv(tmp_path)}}
    out = str(tmp_path / "out")
    manifest = pipeline.run_pipeline(cfg, out)
    assert [s["name"] for s in manifest["stages"]] == ["ingest"]
    assert manifest["stages"][0]["status"] == "ok"
    assert "graph.json" in manifest["artifacts"]
    assert "cleaning_report.json" in manifest["artifacts"]
    assert manifest["stats"]["ingest"]["nodes"] == 12 * 6
    assert manifest["stats"]["ingest"]["edges"] == 12 * 5


def test_dangling_reduction_reference_fails_fast(tmp_path):
    cfg = heart_config(tmp_path, reductions=[{
        "method": "mds",
        "embedding": {"projection": "heart_full", "method": "node2vec",
                      "dimension": 99},
    }])
    out = str(tmp_path / "out")
    with pytest.raises(PipelineValidationError):
        pipeline.run_pipeline(cfg, out)
    # validation runs before any stage work
    assert not os.path.exists(os.path.join(out, "graph.json"))


def test_grid_one_projection_three_methods_three_dims(tmp_path):
    cfg = heart_config(tmp_path, embeddings=[
        {"method": m, "dimension": d, "seed": 1,
         "params": (SMALL_N2V if m == "node2vec"
                    else SMALL_SAGE if m == "graphsage" else {})}
        for m in ("node2vec", "fastrp", "graphsage")
        for d in (4, 8, 16)
    ])
    out = str(tmp_path / "out")
    manifest = pipeline.run_pipeline(cfg, out)
    embed_stats = manifest["stats"]["embed"]
    assert len(embed_stats) == 9
    csvs = [f for f in out_files(out) if f.endswith(".embedding.csv")]
    assert len(csvs) == 9
    for m in ("node2vec", "fastrp", "graphsage"):
        for d in (4, 8, 16):
            cell = f"heart_full_{m}_{d}"
            assert f"{cell}.embedding.csv" in csvs
            assert embed_stats[cell] == {"nodes": 12 * 6, "dimension": d}


def test_full_heart_pipeline_with_knn_and_plots(tmp_path):
    cfg = heart_config(
        tmp_path,
        knn={"embedding": {"projection": "heart_full", "method": "fastrp",
                           "dimension": 8},
             "topK": 3, "deltaThreshold": 0.0, "labelFilter": "Person"},
        reductions=[{"method": "tsne", "embedding": "all",
                     "params": {"iterations": 260},
                     "node_filter": "Person", "classes": "disease_target"}],
    )
    out = str(tmp_path / "out")
    manifest = pipeline.run_pipeline(cfg, out)
    names = [s["name"] for s in manifest["stages"]]
    assert names == ["ingest", "project", "embed", "knn", "reduce", "plot"]
    assert manifest["stats"]["knn"]["relationshipsWritten"] == 12 * 3
    points = os.path.join(out, "heart_full_fastrp_8_tsne.points.csv")
    with open(points) as f:
        rows = f.read().splitlines()[1:]
    assert len(rows) == 12                      # Person nodes only
    classes = {r.split(",")[2] for r in rows}
    assert classes <= {"0", "1"}
    svg = open(os.path.join(out, "heart_full_fastrp_8_tsne.svg")).read()
    assert svg.count("<circle") == 12


def test_manifest_covers_every_artifact(tmp_path):
    cfg = heart_config(tmp_path, reductions=[
        {"method": "mds", "embedding": "all"}])
    out = str(tmp_path / "out")
    manifest = pipeline.run_pipeline(cfg, out)
    assert set(manifest["artifacts"]) == set(out_files(out))
    for rel, digest in manifest["artifacts"].items():
        assert pipeline.sha256_file(os.path.join(out, rel)) == digest


def test_two_runs_checksum_identical(tmp_path):
    make = lambda: heart_config(
        tmp_path,
        embeddings=[{"method": "node2vec", "dimension": 6, "seed": 3,
                     "params": dict(SMALL_N2V)},
                    {"method": "fastrp", "dimension": 6, "seed": 3}],
        reductions=[{"method": "tsne", "params": {"iterations": 50}}],
    )
    m1 = pipeline.run_pipeline(make(), str(tmp_path / "o1"))
    m2 = pipeline.run_pipeline(make(), str(tmp_path / "o2"))
    assert m1["artifacts"] == m2["artifacts"]


def test_stage_composition_equals_full_run(tmp_path):
    cfg = heart_config(
        tmp_path,
        knn={"embedding": {"projection": "heart_full", "method": "fastrp",
                           "dimension": 8},
             "topK": 2, "deltaThreshold": 0.0},
        reductions=[{"method": "mds", "embedding": "all"}],
    )
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    full_out = str(tmp_path / "full")
    pipeline.run_pipeline(cfg, full_out)

    step_out = str(tmp_path / "steps")
    for stage in ("ingest", "project", "embed", "knn", "reduce", "plot"):
        code = cli.main([stage, "--config", str(cfg_path), "--out", step_out])
        assert code == cli.EXIT_OK
    assert out_files(full_out) == out_files(step_out)
    for rel in out_files(full_out):
        assert (pipeline.sha256_file(os.path.join(full_out, rel))
                == pipeline.sha256_file(os.path.join(step_out, rel))), rel


def test_run_until_stops_early(tmp_path):
    cfg = heart_config(tmp_path, reductions=[{"method": "mds"}])
    out = str(tmp_path / "out")
    manifest = pipeline.run_pipeline(cfg, out, run_until="project")
    assert [s["name"] for s in manifest["stages"]] == ["ingest", "project"]
    assert not [f for f in out_files(out) if f.endswith(".embedding.csv")]


def test_quality_without_knn_warns_zero(tmp_path):
    cfg = movielens_config(tmp_path, queries={
        "rating_prediction": {"users": ["Bob"], "movies": ["Anatomy"]}})
    out = str(tmp_path / "out")
    manifest = pipeline.run_pipeline(cfg, out)
    q = json.load(open(os.path.join(out, "quality.json")))
    assert q["quality"] == 0.0
    assert q["warnings"]
    assert manifest["stats"]["predict"]["rows"] == 1


def test_movielens_predict_stage_csv(tmp_path):
    cfg = movielens_config(
        tmp_path,
        projections=[{"kind": "strict"}],
        embeddings=[{"method": "fastrp", "dimension": 8, "seed": 42}],
        knn={"embedding": {"projection": "movielens_strict",
                           "method": "fastrp", "dimension": 8},
             "topK": 2, "deltaThreshold": 0.0, "labelFilter": "User"},
        queries={"rating_prediction": {"users": ["Bob", "Alice"],
                                       "movies": ["TheLFR", "Anatomy"]}},
    )
    out = str(tmp_path / "out")
    manifest = pipeline.run_pipeline(cfg, out)
    assert manifest["stats"]["quality"]["quality"] > 0.0
    text = open(os.path.join(out, "predictions.csv")).read()
    lines = text.splitlines()
    assert lines[0] == ("userId,movie,title,prediction_rating,"
                        "real_rating,difference")
    assert len(lines) == 5


def test_cli_invalid_embedding_dimension_exit_2(tmp_path):
    cfg = heart_config(tmp_path,
                       embeddings=[{"method": "fastrp", "dimension": 0}])
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    code = cli.main(["run", "--config", str(cfg_path),
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_VALIDATION


def test_cli_missing_dataset_file_exit_3(tmp_path):
    cfg = {"dataset": {"kind": "heart",
                       "path": str(tmp_path / "nope.csv")}}
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    code = cli.main(["run", "--config", str(cfg_path),
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_STAGE


def test_cli_out_dir_env_fallback(tmp_path, monkeypatch):
    cfg = {"dataset": {"kind": "heart", "path": write_heart_csv(tmp_path)}}
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    out = str(tmp_path / "env_out")
    monkeypatch.setenv(pipeline.OUTPUT_ENV_VAR, out)
    assert cli.main(["run", "--config", str(cfg_path)]) == cli.EXIT_OK
    assert os.path.exists(os.path.join(out, "graph.json"))


def test_cli_predict_and_report_commands(tmp_path, capsys):
    cfg = movielens_config(
        tmp_path,
        projections=[{"kind": "strict"}],
        embeddings=[{"method": "fastrp", "dimension": 8, "seed": 42}],
        knn={"embedding": {"projection": "movielens_strict",
                           "method": "fastrp", "dimension": 8},
             "topK": 2, "deltaThreshold": 0.0, "labelFilter": "User"},
    )
    out = str(tmp_path / "out")
    pipeline.run_pipeline(cfg, out)
    pred_csv = str(tmp_path / "pred.csv")
    code = cli.main(["predict", "--graph", os.path.join(out, "graph_knn.json"),
                     "--users", "Bob,James", "--movies", "TheLFR,Anatomy",
                     "--csv-out", pred_csv])
    assert code == cli.EXIT_OK
    assert len(open(pred_csv).read().splitlines()) == 5
    code = cli.main(["report", "--predictions", pred_csv])
    assert code == cli.EXIT_OK
    rep = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert set(rep) >= {"rows", "exact_matches", "count_abs_diff_ge_threshold"}


def test_failed_stage_recorded_in_manifest(tmp_path):
    cfg = {"dataset": {"kind": "heart", "path": str(tmp_path / "nope.csv")}}
    out = str(tmp_path / "out")
    with pytest.raises(StageError):
        pipeline.run_pipeline(cfg, out)
    manifest = read_manifest(out)
    assert manifest["stages"][-1]["name"] == "ingest"
    assert manifest["stages"][-1]["status"] == "failed"
    assert "error" in manifest["stages"][-1]


def test_seed_override_changes_seeded_artifacts(tmp_path):
    cfg = heart_config(tmp_path)
    m1 = pipeline.run_pipeline(cfg, str(tmp_path / "a"), seed_override=1)
    m2 = pipeline.run_pipeline(cfg, str(tmp_path / "b"), seed_override=2)
    rel = "heart_full_fastrp_8.embedding.csv"
    assert m1["artifacts"][rel] != m2["artifacts"][rel]
    # unseeded stage output unchanged
    assert m1["artifacts"]["graph.json"] == m2["artifacts"]["graph.json"]
