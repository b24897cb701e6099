import json

import numpy as np
import pytest

from sliceprof.features import featurize_trace
from sliceprof.profiles import (
    ClusterProfile,
    SliceRules,
    profile_clusters,
    recommend_slices,
)
from sliceprof.report import emit_report, report_metadata
from sliceprof.synth import default_scenario, generate
from sliceprof.trace import ResourceSample, ServiceFamily, Trace
from test_trace import make_record, make_settings

VIDEO = "720p Video Stream"
IOT = "Air Pollution Service Request"


def two_user_trace():
    # heavy video UE 1 vs light messaging-free IoT UE 2, dyadic values
    heavy = [
        make_record(time=0.0, ue=1, name=VIDEO, data_uplink_kb=4.0,
                    data_downlink_kb=1024.0, resources=ResourceSample(64.0, 0.5, 32.0)),
        make_record(time=5.0, ue=1, name=VIDEO, data_uplink_kb=2.0,
                    data_downlink_kb=512.0, resources=ResourceSample(32.0, 0.25, 16.0)),
    ]
    light = [
        make_record(time=1.0, ue=2, name=IOT, data_uplink_kb=0.5,
                    data_downlink_kb=0.25, resources=ResourceSample(1.0, 0.125, 0.5)),
    ]
    return Trace(ue_logs=heavy, iot_logs=light, scenario_settings=make_settings())


def test_single_cluster_conserves_totals():
    trace = two_user_trace()
    matrix = featurize_trace(trace)
    (profile,) = profile_clusters(trace, [0, 0], matrix)
    assert profile.member_count == 2
    assert profile.uplink_kb_total == 6.5
    assert profile.downlink_kb_total == 1536.25
    assert profile.resource_usage[ServiceFamily.VIDEO_STREAMING].ram_mb == 96.0
    assert profile.resource_usage[ServiceFamily.IOT_SENSOR].ram_mb == 1.0


def test_singleton_clusters_equal_row_sums():
    trace = two_user_trace()
    matrix = featurize_trace(trace)
    first, second = profile_clusters(trace, [0, 1], matrix)
    assert first.member_count == second.member_count == 1
    assert first.uplink_kb_total == 6.0 and first.downlink_kb_total == 1536.0
    assert second.uplink_kb_total == 0.5 and second.downlink_kb_total == 0.25
    assert first.homogeneity == 0.0 and second.homogeneity == 0.0


def test_two_cluster_fixture_contrast():
    trace = two_user_trace()
    matrix = featurize_trace(trace)
    heavy, light = profile_clusters(trace, [0, 1], matrix)
    assert heavy.downlink_kb_total > light.downlink_kb_total
    assert light.service_distribution[ServiceFamily.IOT_SENSOR] == 1.0
    assert heavy.service_distribution[ServiceFamily.VIDEO_STREAMING] == 1.0


def test_shares_sum_to_one_or_zero():
    trace = generate(default_scenario(seed=4, heavy_count=3, light_count=3, horizon_s=1200.0))
    matrix = featurize_trace(trace)
    assignment = np.arange(matrix.n) % 3
    for profile in profile_clusters(trace, assignment, matrix):
        total = sum(profile.service_distribution.values())
        assert abs(total - 1.0) <= 1e-9 or total == 0.0


def test_cluster_conservation_against_trace():
    trace = generate(default_scenario(seed=8, heavy_count=4, light_count=5, horizon_s=1800.0))
    matrix = featurize_trace(trace)
    assignment = np.arange(matrix.n) % 2
    profiles = profile_clusters(trace, assignment, matrix)
    records = trace.ue_logs + trace.iot_logs
    # exact: generator quantizes every draw
    assert sum(p.uplink_kb_total for p in profiles) == sum(r.data_uplink_kb for r in records)
    assert sum(p.downlink_kb_total for p in profiles) == sum(r.data_downlink_kb for r in records)
    ram = sum(r.ram_mb for p in profiles for r in p.resource_usage.values())
    assert ram == sum(r.resources.ram_mb for r in records)
    assert sum(p.member_count for p in profiles) == matrix.n


def test_homogeneity_decreases_with_splitting():
    trace = generate(default_scenario(seed=2, heavy_count=4, light_count=4, horizon_s=1800.0))
    matrix = featurize_trace(trace)
    (single,) = profile_clusters(trace, np.zeros(matrix.n, dtype=int), matrix)
    split = profile_clusters(trace, np.arange(matrix.n) % 2, matrix)
    assert sum(p.homogeneity for p in split) <= single.homogeneity + 1e-9


def test_assignment_length_mismatch():
    trace = two_user_trace()
    matrix = featurize_trace(trace)
    with pytest.raises(ValueError, match="length"):
        profile_clusters(trace, [0], matrix)


def test_trace_ue_missing_from_matrix():
    trace = two_user_trace()
    matrix = featurize_trace(trace)
    smaller = type(matrix)(matrix.ue_ids[:1], list(matrix.columns), matrix.values[:1])
    with pytest.raises(ValueError, match="missing"):
        profile_clusters(trace, [0], smaller)


# --------------------------------------------------------------------------
# slice recommendation


def prof(cluster_id=0, members=10, dn=0.0, shares=None, ram=0.0):
    dist = {f: 0.0 for f in ServiceFamily}
    dist.update(shares or {})
    res = {f: ResourceSample() for f in ServiceFamily}
    res[ServiceFamily.VIDEO_STREAMING] = ResourceSample(ram, 0.0, 0.0)
    return ClusterProfile(
        cluster_id=cluster_id,
        member_count=members,
        uplink_kb_total=0.0,
        downlink_kb_total=dn,
        service_distribution=dist,
        resource_usage=res,
        homogeneity=0.0,
    )


def test_zero_usage_cluster_is_best_effort():
    (template,) = recommend_slices([prof()])
    assert template.slice_class == "best-effort"
    assert template.dominant_service is None


def test_iot_dominated_cluster_is_mmtc():
    (template,) = recommend_slices(
        [prof(shares={ServiceFamily.IOT_SENSOR: 0.9, ServiceFamily.SOCIAL_NETWORK: 0.1})]
    )
    assert template.slice_class == "mMTC"
    assert template.dominant_service is ServiceFamily.IOT_SENSOR


def test_video_heavy_cluster_is_embb():
    (template,) = recommend_slices(
        [
            prof(
                dn=2e6,  # 2e5 KB per UE over 10 members
                shares={ServiceFamily.VIDEO_STREAMING: 0.7, ServiceFamily.IOT_SENSOR: 0.3},
            )
        ]
    )
    assert template.slice_class == "eMBB"
    assert template.downlink_kb_per_ue == 2e5


def test_video_light_cluster_is_best_effort():
    (template,) = recommend_slices(
        [prof(dn=100.0, shares={ServiceFamily.VIDEO_STREAMING: 1.0})]
    )
    assert template.slice_class == "best-effort"


def test_uav_dominant_cluster_is_urllc():
    (template,) = recommend_slices(
        [prof(shares={ServiceFamily.UAV_DELIVERY: 0.6, ServiceFamily.IOT_SENSOR: 0.4})]
    )
    assert template.slice_class == "URLLC"


def test_iot_below_threshold_is_best_effort():
    (template,) = recommend_slices(
        [
            prof(
                shares={
                    ServiceFamily.IOT_SENSOR: 0.4,
                    ServiceFamily.VIDEO_STREAMING: 0.3,
                    ServiceFamily.SOCIAL_NETWORK: 0.3,
                }
            )
        ]
    )
    assert template.slice_class == "best-effort"


def test_rules_are_configurable():
    profile = prof(dn=500.0, shares={ServiceFamily.VIDEO_STREAMING: 1.0})
    (template,) = recommend_slices([profile], SliceRules(embb_downlink_kb_per_ue=10.0))
    assert template.slice_class == "eMBB"


def test_recommend_requires_profiles():
    with pytest.raises(ValueError):
        recommend_slices([])


def test_resource_totals_summed_over_families():
    (template,) = recommend_slices([prof(ram=48.0)])
    assert template.ram_mb_total == 48.0


# --------------------------------------------------------------------------
# report emission


def fixture_report_inputs():
    trace = two_user_trace()
    matrix = featurize_trace(trace)
    profiles = profile_clusters(trace, [0, 1], matrix)
    templates = recommend_slices(profiles)
    metadata = report_metadata(method="kmeans", k=2, seed=7, standardization="zscore")
    return profiles, templates, metadata


def test_emit_refuses_empty_profiles(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], [], {}, tmp_path)


def test_emit_report_files_and_shapes(tmp_path):
    profiles, templates, metadata = fixture_report_inputs()
    written = emit_report(profiles, templates, metadata, tmp_path)
    names = {p.name for p in written}
    assert names == {
        "report.json",
        "data_usage.csv",
        "service_distribution.csv",
        "resource_usage.csv",
        "data_usage.svg",
        "service_distribution.svg",
        "resource_usage.svg",
    }
    for csv_name in ("data_usage.csv", "service_distribution.csv", "resource_usage.csv"):
        lines = (tmp_path / csv_name).read_text().strip().splitlines()
        assert len(lines) == 3  # header + one row per cluster
    doc = json.loads((tmp_path / "report.json").read_bytes())
    assert doc["metadata"]["units"]["data"] == "KB"
    assert len(doc["profiles"]) == 2 and len(doc["templates"]) == 2


def test_emit_report_deterministic(tmp_path):
    profiles, templates, metadata = fixture_report_inputs()
    emit_report(profiles, templates, metadata, tmp_path / "a")
    emit_report(profiles, templates, metadata, tmp_path / "b")
    for name in ("report.json", "data_usage.csv", "data_usage.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_emit_report_unwritable_path(tmp_path):
    profiles, templates, metadata = fixture_report_inputs()
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory")
    with pytest.raises(OSError):
        emit_report(profiles, templates, metadata, blocker / "reports")


def test_emit_report_formats_subset(tmp_path):
    profiles, templates, metadata = fixture_report_inputs()
    written = emit_report(profiles, templates, metadata, tmp_path, formats=("json",))
    assert [p.name for p in written] == ["report.json"]
    with pytest.raises(ValueError):
        emit_report(profiles, templates, metadata, tmp_path, formats=("pdf",))


def test_emit_report_homogeneity_by_k(tmp_path):
    profiles, templates, metadata = fixture_report_inputs()
    emit_report(
        profiles, templates, metadata, tmp_path, homogeneity_by_k={2: 4.0, 3: 2.0}
    )
    doc = json.loads((tmp_path / "report.json").read_bytes())
    assert doc["homogeneity_by_k"] == {"2": 4.0, "3": 2.0}


def test_report_metadata_headers():
    meta = report_metadata(method="hier", k=3, metric="jaccard", linkage="average")
    assert meta["metric"] == "jaccard"
    assert "urllc_rule" in meta and "heuristic" in meta["urllc_rule"]
    assert meta["embb_downlink_kb_per_ue"] == 1e5
