"""Report emission: JSON/CSV tables and deterministic SVG bar charts.

One table/chart per panel: data usage, service distribution, resource usage.
SVGs are rendered by a small built-in writer so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .profiles import ClusterProfile, SliceRules, SliceTemplate
from .trace import ServiceFamily

UNITS = {
    "data": "KB",
    "ram": "MB",
    "storage": "MB",
    "cpu": "normalized share",
}

_PALETTE = ("#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2")


def report_metadata(
    *,
    method: str,
    k: int,
    seed: int | None = None,
    metric: str | None = None,
    linkage: str | None = None,
    standardization: str | None = None,
    rules: SliceRules = SliceRules(),
) -> dict:
    """Run header recorded at the top of every report."""
    meta = {
        "method": method,
        "k": k,
        "units": dict(UNITS),
        "embb_downlink_kb_per_ue": rules.embb_downlink_kb_per_ue,
        "mmtc_share_threshold": rules.mmtc_share_threshold,
        "urllc_rule": "heuristic: uav-delivery dominant (no latency signal in features)",
    }
    if seed is not None:
        meta["seed"] = seed
    if metric is not None:
        meta["metric"] = metric
    if linkage is not None:
        meta["linkage"] = linkage
    if standardization is not None:
        meta["standardization"] = standardization
    return meta


def _profile_doc(p: ClusterProfile) -> dict:
    return {
        "cluster_id": p.cluster_id,
        "member_count": p.member_count,
        "uplink_kb_total": p.uplink_kb_total,
        "downlink_kb_total": p.downlink_kb_total,
        "service_distribution": {
            f.value: share for f, share in p.service_distribution.items()
        },
        "resource_usage": {
            f.value: {
                "ram_mb": r.ram_mb,
                "cpu_units": r.cpu_units,
                "storage_mb": r.storage_mb,
            }
            for f, r in p.resource_usage.items()
        },
        "homogeneity": p.homogeneity,
    }


def _template_doc(t: SliceTemplate) -> dict:
    return {
        "cluster_id": t.cluster_id,
        "slice_class": t.slice_class,
        "dominant_service": t.dominant_service.value if t.dominant_service else None,
        "downlink_kb_per_ue": t.downlink_kb_per_ue,
        "ram_mb_total": t.ram_mb_total,
        "cpu_units_total": t.cpu_units_total,
        "storage_mb_total": t.storage_mb_total,
    }


def _csv(rows: list[list], header: list[str]) -> str:
    def cell(v) -> str:
        return repr(float(v)) if isinstance(v, float) else str(v)

    lines = [",".join(header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _data_usage_csv(profiles: list[ClusterProfile]) -> str:
    rows = [
        [p.cluster_id, p.member_count, p.uplink_kb_total, p.downlink_kb_total]
        for p in profiles
    ]
    return _csv(rows, ["cluster_id", "member_count", "uplink_kb_total", "downlink_kb_total"])


def _service_distribution_csv(profiles: list[ClusterProfile]) -> str:
    header = ["cluster_id"] + [f"share_{f.value}" for f in ServiceFamily]
    rows = [
        [p.cluster_id] + [p.service_distribution.get(f, 0.0) for f in ServiceFamily]
        for p in profiles
    ]
    return _csv(rows, header)


def _resource_usage_csv(profiles: list[ClusterProfile]) -> str:
    header = ["cluster_id"]
    for f in ServiceFamily:
        header += [f"{f.value}_ram_mb", f"{f.value}_cpu_units", f"{f.value}_storage_mb"]
    rows = []
    for p in profiles:
        row: list = [p.cluster_id]
        for f in ServiceFamily:
            r = p.resource_usage[f]
            row += [r.ram_mb, r.cpu_units, r.storage_mb]
        rows.append(row)
    return _csv(rows, header)


# --------------------------------------------------------------------------
# SVG


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _bar_chart_svg(
    title: str,
    group_labels: list[str],
    series: list[tuple[str, list[float]]],
    width: int = 640,
    height: int = 360,
) -> str:
    left, right, top, bottom = 60, 20, 40, 50
    plot_w = width - left - right
    plot_h = height - top - bottom
    peak = max((max(vals) for _, vals in series if vals), default=0.0)
    scale = plot_h / peak if peak > 0 else 0.0
    n_groups = max(len(group_labels), 1)
    group_w = plot_w / n_groups
    bar_w = group_w * 0.8 / max(len(series), 1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<text x="12" y="{top - 8}" font-family="sans-serif" font-size="11">'
        f"max {_fmt(peak)}</text>",
    ]
    for g, label in enumerate(group_labels):
        gx = left + g * group_w
        for s, (_, vals) in enumerate(series):
            v = vals[g]
            bh = v * scale
            x = gx + group_w * 0.1 + s * bar_w
            y = top + plot_h - bh
            color = _PALETTE[s % len(_PALETTE)]
            parts.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_w)}" '
                f'height="{_fmt(bh)}" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{_fmt(gx + group_w / 2)}" y="{top + plot_h + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">{label}</text>'
        )
    for s, (name, _) in enumerate(series):
        lx = left + s * 150
        ly = height - 14
        color = _PALETTE[s % len(_PALETTE)]
        parts.append(f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" fill="{color}"/>')
        parts.append(
            f'<text x="{lx + 16}" y="{ly}" font-family="sans-serif" font-size="11">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _panel_svgs(profiles: list[ClusterProfile]) -> dict[str, str]:
    labels = [f"cluster {p.cluster_id}" for p in profiles]
    data_usage = _bar_chart_svg(
        "Data usage per cluster (KB)",
        labels,
        [
            ("uplink_kb", [p.uplink_kb_total for p in profiles]),
            ("downlink_kb", [p.downlink_kb_total for p in profiles]),
        ],
    )
    service = _bar_chart_svg(
        "Service distribution per cluster (session share)",
        labels,
        [
            (f.value, [p.service_distribution.get(f, 0.0) for p in profiles])
            for f in ServiceFamily
        ],
    )
    resources = _bar_chart_svg(
        "Resource usage per cluster",
        labels,
        [
            ("ram_mb", [sum(r.ram_mb for r in p.resource_usage.values()) for p in profiles]),
            ("cpu_units", [sum(r.cpu_units for r in p.resource_usage.values()) for p in profiles]),
            ("storage_mb", [sum(r.storage_mb for r in p.resource_usage.values()) for p in profiles]),
        ],
    )
    return {
        "data_usage.svg": data_usage,
        "service_distribution.svg": service,
        "resource_usage.svg": resources,
    }


def emit_report(
    profiles: list[ClusterProfile],
    templates: list[SliceTemplate],
    metadata: dict,
    out_dir: str | Path,
    formats: tuple[str, ...] = ("json", "csv", "svg"),
    homogeneity_by_k: dict[int, float] | None = None,
) -> list[Path]:
    """Write the selected report artifacts into ``out_dir``; returns the paths."""
    if not profiles:
        raise ValueError("refusing to emit a report for an empty profile list")
    unknown = set(formats) - {"json", "csv", "svg"}
    if unknown:
        raise ValueError(f"unknown report formats: {sorted(unknown)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "json" in formats:
        doc = {
            "metadata": metadata,
            "profiles": [_profile_doc(p) for p in profiles],
            "templates": [_template_doc(t) for t in templates],
        }
        if homogeneity_by_k is not None:
            doc["homogeneity_by_k"] = {str(k): v for k, v in homogeneity_by_k.items()}
        path = out / "report.json"
        path.write_bytes(
            (json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n").encode()
        )
        written.append(path)
    if "csv" in formats:
        for name, text in (
            ("data_usage.csv", _data_usage_csv(profiles)),
            ("service_distribution.csv", _service_distribution_csv(profiles)),
            ("resource_usage.csv", _resource_usage_csv(profiles)),
        ):
            path = out / name
            path.write_bytes(text.encode())
            written.append(path)
    if "svg" in formats:
        for name, text in _panel_svgs(profiles).items():
            path = out / name
            path.write_bytes(text.encode())
            written.append(path)
    return written
