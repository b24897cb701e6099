import json

import pytest

from sliceprof.cli import main
from sliceprof.features import read_features_csv
from sliceprof.synth import default_scenario
from sliceprof.trace import parse_trace, write_scenario


def run(*argv) -> int:
    return main(list(argv))


def tree_bytes(root):
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_generate_default_scenario(tmp_path):
    out = tmp_path / "trace.json"
    assert run("generate", "--out", str(out), "--seed", "5") == 0
    trace = parse_trace(out.read_bytes())
    assert trace.scenario_settings.seed == 5
    assert trace.ue_logs


def test_generate_same_seed_same_bytes(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    run("generate", "--out", str(a), "--seed", "9")
    run("generate", "--out", str(b), "--seed", "9")
    assert a.read_bytes() == b.read_bytes()


def test_generate_from_scenario_file(tmp_path):
    scenario = tmp_path / "scenario.json"
    scenario.write_bytes(
        write_scenario(default_scenario(seed=3, heavy_count=2, light_count=2, horizon_s=600.0))
    )
    out = tmp_path / "trace.json"
    assert run("generate", "--scenario", str(scenario), "--out", str(out)) == 0
    assert parse_trace(out.read_bytes()).scenario_settings.seed == 3
    # --seed overrides the file's seed
    assert run("generate", "--scenario", str(scenario), "--out", str(out), "--seed", "8") == 0
    assert parse_trace(out.read_bytes()).scenario_settings.seed == 8


def test_seed_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("SLICEPROF_SEED", "4")
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    run("generate", "--out", str(a))
    run("generate", "--out", str(b), "--seed", "4")
    assert a.read_bytes() == b.read_bytes()


@pytest.fixture()
def small_run(tmp_path):
    trace = tmp_path / "trace.json"
    features = tmp_path / "features.csv"
    run("generate", "--out", str(trace), "--seed", "2")
    run("featurize", "--trace", str(trace), "--out", str(features))
    return tmp_path, trace, features


def test_featurize_csv_header(small_run):
    _, trace, features = small_run
    text = features.read_text()
    assert text.startswith("ue_id,total_uplink_kb,total_downlink_kb,")
    matrix = read_features_csv(features)
    parsed = parse_trace(trace.read_bytes())
    active = {r.user_equipment_id for r in parsed.ue_logs + parsed.iot_logs}
    assert matrix.d == 10 and matrix.n == len(active)


def test_featurize_with_selection(small_run):
    tmp_path, trace, _ = small_run
    selected = tmp_path / "selected.csv"
    assert run("featurize", "--trace", str(trace), "--out", str(selected), "--select", "4") == 0
    matrix = read_features_csv(selected)
    assert matrix.d == 4


def test_featurize_with_explicit_target(small_run):
    tmp_path, trace, _ = small_run
    selected = tmp_path / "selected.csv"
    assert run(
        "featurize", "--trace", str(trace), "--out", str(selected),
        "--select", "3", "--target", "total_downlink_kb",
    ) == 0
    matrix = read_features_csv(selected)
    assert matrix.d == 3
    assert "total_downlink_kb" not in matrix.columns  # target excluded from candidates


def test_cluster_kmeans_two_clusters(small_run):
    tmp_path, _, features = small_run
    out = tmp_path / "assign.json"
    assert run(
        "cluster", "--features", str(features), "--out", str(out),
        "--method", "kmeans", "--k", "2", "--seed", "0",
    ) == 0
    doc = json.loads(out.read_bytes())
    assert doc["method"] == "kmeans" and doc["k"] == 2
    assert set(doc["assignment"].values()) == {0, 1}
    assert len(doc["centroids"]) == 2
    assert doc["sse_trace"][-1] == doc["sse"]


def test_cluster_hier_jaccard_forces_minmax(small_run):
    tmp_path, _, features = small_run
    out = tmp_path / "assign.json"
    assert run(
        "cluster", "--features", str(features), "--out", str(out),
        "--method", "hier", "--metric", "jaccard", "--k", "2",
    ) == 0
    doc = json.loads(out.read_bytes())
    assert doc["standardization"] == "minmax"
    assert doc["standardization_auto"] is True
    assert len(doc["merges"]) == read_features_csv(features).n - 1


def test_cluster_hier_explicit_minmax_is_not_flagged(small_run):
    tmp_path, _, features = small_run
    out = tmp_path / "assign.json"
    run(
        "cluster", "--features", str(features), "--out", str(out),
        "--method", "hier", "--metric", "jaccard", "--standardize", "minmax", "--k", "2",
    )
    doc = json.loads(out.read_bytes())
    assert doc["standardization_auto"] is False


def test_profile_stage(small_run):
    tmp_path, trace, features = small_run
    assign = tmp_path / "assign.json"
    run(
        "cluster", "--features", str(features), "--out", str(assign),
        "--method", "kmeans", "--k", "2", "--seed", "0",
    )
    report_dir = tmp_path / "report"
    assert run(
        "profile", "--trace", str(trace), "--assignment", str(assign),
        "--features", str(features), "--out-dir", str(report_dir),
    ) == 0
    doc = json.loads((report_dir / "report.json").read_bytes())
    assert doc["metadata"]["method"] == "kmeans"
    assert {p["cluster_id"] for p in doc["profiles"]} == {0, 1}


def test_pipeline_composability(tmp_path):
    pipe = tmp_path / "pipe"
    assert run(
        "pipeline", "--out-dir", str(pipe), "--seed", "6", "--k", "2", "--restarts", "5",
    ) == 0
    manual = tmp_path / "manual"
    manual.mkdir()
    run("generate", "--out", str(manual / "trace.json"), "--seed", "6")
    run("featurize", "--trace", str(manual / "trace.json"), "--out", str(manual / "features.csv"))
    run(
        "cluster", "--features", str(manual / "features.csv"),
        "--out", str(manual / "assignment_k2.json"),
        "--method", "kmeans", "--k", "2", "--restarts", "5", "--seed", "6",
    )
    run(
        "profile", "--trace", str(manual / "trace.json"),
        "--assignment", str(manual / "assignment_k2.json"),
        "--features", str(manual / "features.csv"),
        "--out-dir", str(manual / "report_k2"),
    )
    assert tree_bytes(pipe) == tree_bytes(manual)


def test_pipeline_k_sweep(tmp_path):
    out = tmp_path / "sweep"
    assert run(
        "pipeline", "--out-dir", str(out), "--seed", "1",
        "--k-sweep", "2,3,4", "--restarts", "5",
    ) == 0
    homogeneity = json.loads((out / "homogeneity.json").read_bytes())
    assert set(homogeneity) == {"2", "3", "4"}
    assert homogeneity["4"] <= homogeneity["3"] <= homogeneity["2"]
    for k in (2, 3, 4):
        assert (out / f"report_k{k}" / "report.json").exists()


def test_bad_flags_exit_two():
    assert run("cluster", "--method", "voronoi") == 2


def test_missing_input_exits_one(tmp_path, capsys):
    code = run("featurize", "--trace", str(tmp_path / "nope.json"), "--out", str(tmp_path / "f.csv"))
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_stage_failure_reports_diagnostic(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_bytes(b"{}")
    code = run("featurize", "--trace", str(bad), "--out", str(tmp_path / "f.csv"))
    assert code == 1
    assert "ue_logs" in capsys.readouterr().err
