"""Command-line pipeline: generate -> featurize -> cluster -> profile.

Each stage reads and writes files, so any stage can be re-run standalone and
`pipeline` is exactly the four stages chained on materialized artifacts. All
randomness flows from --seed (or the SLICEPROF_SEED environment variable).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import features as ft
from .hierarchy import agglomerate, cut, dendrogram_rows, distance_matrix
from .kmeans import kmeans_restarts, result_to_document
from .profiles import profile_clusters, recommend_slices
from .report import emit_report, report_metadata
from .synth import ScenarioError, default_scenario, generate
from .trace import TraceError, parse_scenario, parse_trace, write_trace

SEED_ENV_VAR = "SLICEPROF_SEED"


def _dump_json(doc: dict, path: Path) -> None:
    path.write_bytes(
        (json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n").encode()
    )


def _resolve_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else None


# --------------------------------------------------------------------------
# stage helpers (shared by the standalone subcommands and `pipeline`)


def run_generate(scenario_path: str | None, seed: int | None, out_path: Path) -> None:
    if scenario_path is not None:
        settings = parse_scenario(Path(scenario_path).read_bytes())
        if seed is not None:
            settings = dataclasses.replace(settings, seed=seed)
    else:
        settings = default_scenario(seed=seed if seed is not None else 0)
    out_path.write_bytes(write_trace(generate(settings)))


def run_featurize(
    trace_path: Path,
    out_path: Path,
    select: int | None,
    target: str | None,
    bins: int,
) -> None:
    trace = parse_trace(trace_path.read_bytes())
    matrix = ft.featurize_trace(trace)
    if select is not None:
        if target is None:
            widened = ft.derive_total_data(matrix)
            picked = ft.mrmr_select(widened, "total_data_kb", select, bins=bins)
        else:
            picked = ft.mrmr_select(matrix, target, select, bins=bins)
        matrix = ft.select_columns(matrix, picked)
    ft.write_features_csv(matrix, out_path)


def run_cluster(
    features_path: Path,
    out_path: Path,
    method: str,
    k: int,
    standardization: str,
    seed: int | None,
    init: str,
    restarts: int,
    max_iter: int,
    tol: float,
    metric: str,
    linkage: str,
) -> None:
    matrix = ft.read_features_csv(features_path)
    auto = False
    if method == "hier" and metric == "jaccard" and standardization != "minmax":
        # generalized Jaccard needs non-negative features
        standardization = "minmax"
        auto = True
    scaled = matrix if standardization == "none" else ft.standardize(matrix, standardization)
    doc: dict = {
        "method": method,
        "k": k,
        "standardization": standardization,
        "standardization_auto": auto,
    }
    if method == "kmeans":
        result = kmeans_restarts(
            scaled,
            k,
            restarts=restarts,
            init=init,
            max_iter=max_iter,
            tol=tol,
            seed=seed if seed is not None else 0,
        )
        doc.update(result_to_document(result, matrix.ue_ids, matrix.columns))
        doc.update({"init": init, "restarts": restarts, "seed": seed if seed is not None else 0})
    elif method == "hier":
        dist = distance_matrix(scaled, metric)
        dend = agglomerate(dist, linkage)
        assignment = cut(dend, k)
        doc.update(
            {
                "metric": metric,
                "linkage": linkage,
                "assignment": {
                    str(ue): int(c) for ue, c in zip(matrix.ue_ids, assignment)
                },
                "merges": dendrogram_rows(dend),
            }
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    _dump_json(doc, out_path)


def run_profile(
    trace_path: Path,
    assignment_path: Path,
    features_path: Path,
    out_dir: Path,
    formats: tuple[str, ...],
) -> None:
    trace = parse_trace(trace_path.read_bytes())
    matrix = ft.read_features_csv(features_path)
    doc = json.loads(assignment_path.read_bytes())
    mapping = doc.get("assignment")
    if not isinstance(mapping, dict):
        raise ValueError(f"{assignment_path}: missing assignment map")
    try:
        assignment = np.array([int(mapping[str(ue)]) for ue in matrix.ue_ids])
    except KeyError as exc:
        raise ValueError(f"assignment missing UE {exc}") from None
    profiles = profile_clusters(trace, assignment, matrix)
    templates = recommend_slices(profiles)
    metadata = report_metadata(
        method=doc.get("method", "unknown"),
        k=int(doc.get("k", len(set(assignment.tolist())))),
        seed=doc.get("seed"),
        metric=doc.get("metric"),
        linkage=doc.get("linkage"),
        standardization=doc.get("standardization"),
    )
    emit_report(profiles, templates, metadata, out_dir, formats=formats)


# --------------------------------------------------------------------------
# subcommand handlers


def _cmd_generate(args) -> int:
    run_generate(args.scenario, _resolve_seed(args), Path(args.out))
    return 0


def _cmd_featurize(args) -> int:
    run_featurize(Path(args.trace), Path(args.out), args.select, args.target, args.bins)
    return 0


def _cmd_cluster(args) -> int:
    run_cluster(
        Path(args.features),
        Path(args.out),
        args.method,
        args.k,
        args.standardize,
        _resolve_seed(args),
        args.init,
        args.restarts,
        args.max_iter,
        args.tol,
        args.metric,
        args.linkage,
    )
    return 0


def _parse_formats(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _cmd_profile(args) -> int:
    run_profile(
        Path(args.trace),
        Path(args.assignment),
        Path(args.features),
        Path(args.out_dir),
        _parse_formats(args.formats),
    )
    return 0


def _cmd_pipeline(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = _resolve_seed(args)
    trace_path = out / "trace.json"
    features_path = out / "features.csv"
    run_generate(args.scenario, seed, trace_path)
    run_featurize(trace_path, features_path, args.select, args.target, args.bins)
    ks = [int(v) for v in args.k_sweep.split(",")] if args.k_sweep else [args.k]
    homogeneity: dict[int, float] = {}
    for k in ks:
        assignment_path = out / f"assignment_k{k}.json"
        run_cluster(
            features_path,
            assignment_path,
            args.method,
            k,
            args.standardize,
            seed,
            args.init,
            args.restarts,
            args.max_iter,
            args.tol,
            args.metric,
            args.linkage,
        )
        run_profile(
            trace_path,
            assignment_path,
            features_path,
            out / f"report_k{k}",
            _parse_formats(args.formats),
        )
        report = json.loads((out / f"report_k{k}" / "report.json").read_bytes())
        homogeneity[k] = sum(p["homogeneity"] for p in report["profiles"])
    if len(ks) > 1:
        _dump_json({str(k): v for k, v in homogeneity.items()}, out / "homogeneity.json")
    return 0


# --------------------------------------------------------------------------
# parser


def _add_seed(parser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"seed for all randomness (default: ${SEED_ENV_VAR} or the scenario's seed)",
    )


def _add_featurize_flags(parser) -> None:
    parser.add_argument("--select", type=int, default=None, help="keep the top N mRMR features")
    parser.add_argument(
        "--target",
        default=None,
        help="mRMR relevance target column (default: derived total_data_kb)",
    )
    parser.add_argument("--bins", type=int, default=8, help="histogram bins for MI")


def _add_cluster_flags(parser) -> None:
    parser.add_argument("--method", choices=("kmeans", "hier"), default="kmeans")
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument(
        "--standardize", choices=("zscore", "minmax", "none"), default="zscore"
    )
    parser.add_argument("--init", choices=("kpp", "forgy"), default="kpp")
    parser.add_argument("--restarts", type=int, default=10)
    parser.add_argument("--max-iter", type=int, default=300)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument(
        "--metric", choices=("euclidean", "cosine", "jaccard"), default="euclidean"
    )
    parser.add_argument(
        "--linkage", choices=("average", "single", "complete"), default="average"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sliceprof",
        description="Synthesize telemetry traces, cluster UEs, and emit slice-planning reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="scenario -> trace document")
    p.add_argument("--scenario", default=None, help="scenario JSON (default: built-in two-population scenario)")
    p.add_argument("--out", required=True)
    _add_seed(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("featurize", help="trace -> per-UE feature CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    _add_featurize_flags(p)
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("cluster", help="features -> assignment document")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    _add_cluster_flags(p)
    _add_seed(p)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("profile", help="trace + assignment -> report files")
    p.add_argument("--trace", required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--formats", default="json,csv,svg")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("pipeline", help="run all four stages into one output directory")
    p.add_argument("--scenario", default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--formats", default="json,csv,svg")
    p.add_argument("--k-sweep", default=None, help="comma-separated ks, e.g. 2,3,4")
    _add_featurize_flags(p)
    _add_cluster_flags(p)
    _add_seed(p)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (TraceError, ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
