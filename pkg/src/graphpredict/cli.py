"""Command-line entry point: full runs plus one subcommand per stage.

Exit codes: 0 success, 2 validation/config error, 3 stage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import pipeline
from .errors import GraphPredictError, PipelineValidationError, StageError
from .graph import PropertyGraph
from .predict import (
    predict_ratings,
    prediction_report,
    query_quality,
    report_to_json,
    rows_to_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STAGE = 3


def _out_dir(args) -> str:
    out = getattr(args, "out", None) or os.environ.get(pipeline.OUTPUT_ENV_VAR)
    if not out:
        raise PipelineValidationError(
            "out", "no output directory: pass --out or set "
            f"{pipeline.OUTPUT_ENV_VAR}")
    os.makedirs(out, exist_ok=True)
    return out


def _config(args) -> dict:
    cfg = pipeline.load_config(args.config)
    return cfg


def _run_stage(name: str, args) -> int:
    cfg = _config(args)
    pipeline.validate_config(cfg)
    out = _out_dir(args)
    func = pipeline._STAGE_FUNCS[name]
    if name in pipeline._SEEDED_STAGES:
        result = func(cfg, out, seed_override=args.seed)
    else:
        result = func(cfg, out)
    print(json.dumps({"stage": name, "artifacts": result["artifacts"]}))
    return EXIT_OK


def _add_common(p, config=True):
    if config:
        p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument("--out", help="output directory "
                   f"(or ${pipeline.OUTPUT_ENV_VAR})")
    p.add_argument("--seed", type=int, default=None,
                   help="global seed override")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (kernels stay sequential)")
    p.add_argument("--deterministic", action="store_true", default=True,
                   help="force sequential deterministic kernels (default)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="graphpredict",
        description="Property-graph embeddings and predictive queries")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full pipeline")
    _add_common(p)
    p.add_argument("--stage", help="run stages up to and including this one")

    for name in ("ingest", "project", "embed", "knn", "reduce", "plot"):
        p = sub.add_parser(name, help=f"run only the {name} stage")
        _add_common(p)

    p = sub.add_parser("predict", help="rating prediction over a graph dump")
    p.add_argument("--graph", required=True, help="graph JSON dump")
    p.add_argument("--users", required=True, help="comma-separated user ids")
    p.add_argument("--movies", required=True, help="comma-separated movie ids")
    p.add_argument("--csv-out", help="write the prediction table here")

    p = sub.add_parser("quality", help="query-quality index over a graph dump")
    p.add_argument("--graph", required=True)
    p.add_argument("--users", required=True)
    p.add_argument("--movies", required=True)

    p = sub.add_parser("report", help="aggregate a prediction CSV")
    p.add_argument("--predictions", required=True, help="prediction CSV path")
    p.add_argument("--threshold", type=float, default=1.0)
    return ap


def _load_graph_file(path: str) -> PropertyGraph:
    with open(path) as f:
        return PropertyGraph.from_json(f.read())


def _cmd_predict(args) -> int:
    graph = _load_graph_file(args.graph)
    users = args.users.split(",")
    movies = args.movies.split(",")
    rows = predict_ratings(graph, users, movies)
    text = rows_to_csv(rows)
    if args.csv_out:
        with open(args.csv_out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_quality(args) -> int:
    graph = _load_graph_file(args.graph)
    warnings = []
    if not graph.edges_with_type("SIMILAR"):
        warnings.append("no SIMILAR edges in graph; quality is 0.0")
        value = 0.0
    else:
        value = query_quality(graph, args.users.split(","),
                              args.movies.split(","))
    print(json.dumps({"quality": value, "warnings": warnings}))
    return EXIT_OK


def _cmd_report(args) -> int:
    import csv

    from .predict import PredictionRow
    rows = []
    with open(args.predictions, newline="") as f:
        for rec in csv.DictReader(f):
            pred = float(rec["prediction_rating"]) if rec["prediction_rating"] else None
            real = float(rec["real_rating"]) if rec["real_rating"] else None
            diff = float(rec["difference"]) if rec["difference"] else None
            rows.append(PredictionRow(rec["userId"], rec["movie"], rec["title"],
                                      pred, real, diff, covered=pred is not None))
    report = prediction_report(rows, threshold=args.threshold)
    print(report_to_json(report))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = _config(args)
            out = _out_dir(args)
            pipeline.run_pipeline(cfg, out, seed_override=args.seed,
                                  run_until=args.stage)
            print(json.dumps({"status": "ok", "out": out}))
            return EXIT_OK
        if args.command in ("ingest", "project", "embed", "knn", "reduce",
                            "plot"):
            return _run_stage(args.command, args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "quality":
            return _cmd_quality(args)
        if args.command == "report":
            return _cmd_report(args)
        raise PipelineValidationError("command", f"unknown {args.command!r}")
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (GraphPredictError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
