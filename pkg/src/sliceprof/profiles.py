"""Per-cluster consumption profiles and slice-template recommendations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix, filter_records, standardize
from .trace import ResourceSample, ServiceFamily, Trace

SLICE_CLASSES = ("eMBB", "mMTC", "URLLC", "best-effort")

_EMBB_FAMILIES = frozenset(
    {
        ServiceFamily.VIDEO_STREAMING,
        ServiceFamily.SOCIAL_NETWORK,
        ServiceFamily.INSTANT_MESSAGING,
    }
)


@dataclass(frozen=True)
class ClusterProfile:
    """What one cluster consumes: traffic, service mix, edge resources.

    ``service_distribution`` holds session-count shares per family (all keys
    present; all-zero when the cluster produced no sessions).
    ``homogeneity`` is the within-cluster SSE of the cluster's z-scored
    feature rows about their mean.
    """

    cluster_id: int
    member_count: int
    uplink_kb_total: float
    downlink_kb_total: float
    service_distribution: dict[ServiceFamily, float]
    resource_usage: dict[ServiceFamily, ResourceSample]
    homogeneity: float


@dataclass(frozen=True)
class SliceRules:
    """Thresholds for the slice-template heuristic."""

    embb_downlink_kb_per_ue: float = 1e5
    mmtc_share_threshold: float = 0.5


@dataclass(frozen=True)
class SliceTemplate:
    cluster_id: int
    slice_class: str
    dominant_service: ServiceFamily | None
    downlink_kb_per_ue: float
    ram_mb_total: float
    cpu_units_total: float
    storage_mb_total: float


def profile_clusters(
    trace: Trace, assignment, feature_matrix: FeatureMatrix
) -> list[ClusterProfile]:
    """One profile per non-empty cluster, ordered by cluster id.

    Usage and resource totals come from the filtered trace records of member
    UEs, so per-cluster sums conserve the trace-wide totals exactly.
    """
    a = np.asarray(assignment, dtype=int)
    if len(a) != feature_matrix.n:
        raise ValueError(
            f"assignment length {len(a)} does not match {feature_matrix.n} UEs"
        )
    if a.size and a.min() < 0:
        raise ValueError("cluster indices must be >= 0")
    cluster_of = {ue: int(c) for ue, c in zip(feature_matrix.ue_ids, a)}
    catalog = trace.scenario_settings.service_catalog
    records = filter_records(trace)

    present = sorted(set(int(c) for c in a))
    up = {c: 0.0 for c in present}
    dn = {c: 0.0 for c in present}
    counts = {c: {f: 0 for f in ServiceFamily} for c in present}
    res = {c: {f: [0.0, 0.0, 0.0] for f in ServiceFamily} for c in present}
    for rec in records:
        c = cluster_of.get(rec.user_equipment_id)
        if c is None:
            raise ValueError(
                f"trace UE {rec.user_equipment_id} missing from the feature matrix"
            )
        family = catalog.get(rec.service_name)
        if family is None:
            raise ValueError(f"service_name {rec.service_name!r} not in catalog")
        up[c] += rec.data_uplink_kb
        dn[c] += rec.data_downlink_kb
        counts[c][family] += 1
        res[c][family][0] += rec.resources.ram_mb
        res[c][family][1] += rec.resources.cpu_units
        res[c][family][2] += rec.resources.storage_mb

    z = standardize(feature_matrix, "zscore").values
    profiles = []
    for c in present:
        mask = a == c
        rows = z[mask]
        homogeneity = float(((rows - rows.mean(axis=0)) ** 2).sum())
        total_sessions = sum(counts[c].values())
        shares = {
            f: (counts[c][f] / total_sessions if total_sessions else 0.0)
            for f in ServiceFamily
        }
        profiles.append(
            ClusterProfile(
                cluster_id=c,
                member_count=int(mask.sum()),
                uplink_kb_total=up[c],
                downlink_kb_total=dn[c],
                service_distribution=shares,
                resource_usage={
                    f: ResourceSample(*res[c][f]) for f in ServiceFamily
                },
                homogeneity=homogeneity,
            )
        )
    return profiles


def _dominant_family(profile: ClusterProfile) -> tuple[ServiceFamily | None, float]:
    best: ServiceFamily | None = None
    best_share = 0.0
    for family in ServiceFamily:
        share = profile.service_distribution.get(family, 0.0)
        if share > best_share:
            best = family
            best_share = share
    return best, best_share


def recommend_slices(
    profiles: list[ClusterProfile], rules: SliceRules = SliceRules()
) -> list[SliceTemplate]:
    """Deterministic rule mapping from profiles to slice templates.

    A cluster dominated by iot-sensor sessions (share above the mMTC
    threshold) maps to mMTC; a broadband-dominated cluster whose per-UE
    downlink exceeds the eMBB threshold maps to eMBB; a uav-delivery-dominated
    cluster maps to URLLC (a heuristic proxy, since no latency signal exists
    in the features); everything else is best-effort.
    """
    if not profiles:
        raise ValueError("profiles must be non-empty")
    templates = []
    for p in profiles:
        dominant, share = _dominant_family(p)
        downlink_per_ue = p.downlink_kb_total / p.member_count
        if dominant is ServiceFamily.IOT_SENSOR and share > rules.mmtc_share_threshold:
            slice_class = "mMTC"
        elif dominant is ServiceFamily.UAV_DELIVERY:
            slice_class = "URLLC"
        elif dominant in _EMBB_FAMILIES and downlink_per_ue > rules.embb_downlink_kb_per_ue:
            slice_class = "eMBB"
        else:
            slice_class = "best-effort"
        templates.append(
            SliceTemplate(
                cluster_id=p.cluster_id,
                slice_class=slice_class,
                dominant_service=dominant,
                downlink_kb_per_ue=downlink_per_ue,
                ram_mb_total=sum(r.ram_mb for r in p.resource_usage.values()),
                cpu_units_total=sum(r.cpu_units for r in p.resource_usage.values()),
                storage_mb_total=sum(r.storage_mb for r in p.resource_usage.values()),
            )
        )
    return templates
