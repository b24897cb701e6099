"""Per-UE behavioral features: filtering, aggregation, scaling, mRMR selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from heapq import merge
from pathlib import Path
from typing import Mapping

import numpy as np

from .trace import ServiceFamily, Trace, UeLogRecord

#: Fixed feature schema, in column order: usage totals, per-family session
#: counts, edge-resource totals.
FEATURE_COLUMNS: tuple[str, ...] = (
    "total_uplink_kb",
    "total_downlink_kb",
    "sessions_video_streaming",
    "sessions_social_network",
    "sessions_instant_messaging",
    "sessions_uav_delivery",
    "sessions_iot_sensor",
    "ram_mb_total",
    "cpu_units_total",
    "storage_mb_total",
)

_SESSION_COLUMN = {
    fam: f"sessions_{fam.value.replace('-', '_')}" for fam in ServiceFamily
}


@dataclass
class FeatureMatrix:
    """n x d matrix of per-UE features with named columns."""

    ue_ids: list[int]
    columns: list[str]
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        if self.values.shape != (len(self.ue_ids), len(self.columns)):
            raise ValueError(
                f"shape {self.values.shape} does not match "
                f"{len(self.ue_ids)} ue_ids x {len(self.columns)} columns"
            )
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("column names must be unique")
        if self.values.size and not np.isfinite(self.values).all():
            raise ValueError("values must be finite")

    @property
    def n(self) -> int:
        return len(self.ue_ids)

    @property
    def d(self) -> int:
        return len(self.columns)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.columns.index(name)]
        except ValueError:
            raise ValueError(f"unknown column {name!r}") from None


def filter_records(trace: Trace) -> list[UeLogRecord]:
    """Clustering-relevant records only: ue_logs and iot_logs merged by time.

    Event logs (attach/detach, handoffs, tracking-area updates, migrations)
    and the scenario settings contribute nothing.
    """
    return list(merge(trace.ue_logs, trace.iot_logs, key=lambda r: r.time))


def aggregate_features(
    records: list[UeLogRecord], catalog: Mapping[str, ServiceFamily]
) -> FeatureMatrix:
    """One row per distinct UE: usage/resource sums plus per-family session counts.

    Rows are ordered by ascending user_equipment_id; ``catalog`` maps each
    record's service_name to its family.
    """
    ids = sorted({r.user_equipment_id for r in records})
    index = {ue: i for i, ue in enumerate(ids)}
    values = np.zeros((len(ids), len(FEATURE_COLUMNS)))
    col = {name: j for j, name in enumerate(FEATURE_COLUMNS)}
    for rec in records:
        family = catalog.get(rec.service_name)
        if family is None:
            raise ValueError(f"service_name {rec.service_name!r} not in catalog")
        i = index[rec.user_equipment_id]
        values[i, col["total_uplink_kb"]] += rec.data_uplink_kb
        values[i, col["total_downlink_kb"]] += rec.data_downlink_kb
        values[i, col[_SESSION_COLUMN[family]]] += 1.0
        values[i, col["ram_mb_total"]] += rec.resources.ram_mb
        values[i, col["cpu_units_total"]] += rec.resources.cpu_units
        values[i, col["storage_mb_total"]] += rec.resources.storage_mb
    return FeatureMatrix(ids, list(FEATURE_COLUMNS), values)


def featurize_trace(trace: Trace) -> FeatureMatrix:
    return aggregate_features(filter_records(trace), trace.scenario_settings.service_catalog)


def standardize(m: FeatureMatrix, method: str = "zscore") -> FeatureMatrix:
    """Column-wise scaling; constant columns map to all-zeros under both methods."""
    if m.n < 1:
        raise ValueError("standardize requires at least one row")
    x = m.values
    if method == "zscore":
        mu = x.mean(axis=0)
        sd = x.std(axis=0)
        out = np.where(sd > 0, (x - mu) / np.where(sd > 0, sd, 1.0), 0.0)
    elif method == "minmax":
        lo = x.min(axis=0)
        span = x.max(axis=0) - lo
        out = np.where(span > 0, (x - lo) / np.where(span > 0, span, 1.0), 0.0)
    else:
        raise ValueError(f"unknown standardization method {method!r}")
    return FeatureMatrix(list(m.ue_ids), list(m.columns), out)


# --------------------------------------------------------------------------
# mutual information / mRMR


def _bin_indices(x: np.ndarray, bins: int) -> np.ndarray:
    lo = x.min()
    hi = x.max()
    if hi == lo:
        return np.zeros(len(x), dtype=np.intp)
    idx = np.floor((x - lo) * (bins / (hi - lo))).astype(np.intp)
    return np.clip(idx, 0, bins - 1)


def _mi_binned(bx: np.ndarray, by: np.ndarray, bins: int) -> float:
    n = len(bx)
    joint = np.zeros((bins, bins))
    np.add.at(joint, (bx, by), 1.0)
    joint /= n
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nz = joint > 0
    outer = px[:, None] * py[None, :]
    mi = float(np.sum(joint[nz] * np.log2(joint[nz] / outer[nz])))
    return max(mi, 0.0)


def mutual_information(x, y, bins: int = 8) -> float:
    """Plug-in mutual information in bits over equal-width binned columns.

    Each column is discretized into ``bins`` equal-width bins over its own
    range; constant columns yield 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("columns must be 1-D and of equal length")
    if len(x) < 1:
        raise ValueError("columns must be non-empty")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    return _mi_binned(_bin_indices(x, bins), _bin_indices(y, bins), bins)


def mrmr_select(
    m: FeatureMatrix, target: str, m_out: int, bins: int = 8
) -> list[str]:
    """Greedy minimum-redundancy feature selection against a target column.

    The first pick maximizes I(f; target); every subsequent pick maximizes
    I(f; target) minus the mean mutual information with the already-selected
    set. Ties break towards the earlier column; the target is excluded from
    the candidates.
    """
    if target not in m.columns:
        raise ValueError(f"unknown target column {target!r}")
    candidates = [c for c in m.columns if c != target]
    if not 1 <= m_out <= len(candidates):
        raise ValueError(f"m_out must be in [1, {len(candidates)}]")
    binned = {c: _bin_indices(m.column(c), bins) for c in m.columns}
    relevance = {c: _mi_binned(binned[c], binned[target], bins) for c in candidates}

    mi_cache: dict[tuple[str, str], float] = {}

    def pair_mi(a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        if key not in mi_cache:
            mi_cache[key] = _mi_binned(binned[key[0]], binned[key[1]], bins)
        return mi_cache[key]

    selected: list[str] = []
    remaining = list(candidates)
    while len(selected) < m_out:
        best_name = None
        best_score = -math.inf
        for name in remaining:
            score = relevance[name]
            if selected:
                score -= sum(pair_mi(name, s) for s in selected) / len(selected)
            if score > best_score:
                best_score = score
                best_name = name
        selected.append(best_name)
        remaining.remove(best_name)
    return selected


def derive_total_data(m: FeatureMatrix, name: str = "total_data_kb") -> FeatureMatrix:
    """Append the derived uplink+downlink column used as the default mRMR target."""
    if name in m.columns:
        raise ValueError(f"column {name!r} already present")
    total = m.column("total_uplink_kb") + m.column("total_downlink_kb")
    values = np.column_stack([m.values, total]) if m.n else np.zeros((0, m.d + 1))
    return FeatureMatrix(list(m.ue_ids), list(m.columns) + [name], values)


def select_columns(m: FeatureMatrix, names: list[str]) -> FeatureMatrix:
    idx = [m.columns.index(n) for n in names]
    values = m.values[:, idx] if m.n else np.zeros((0, len(names)))
    return FeatureMatrix(list(m.ue_ids), list(names), values)


# --------------------------------------------------------------------------
# CSV interchange


def features_to_csv(m: FeatureMatrix) -> str:
    """CSV text with a "ue_id,..." header; floats keep full precision."""
    lines = ["ue_id," + ",".join(m.columns)]
    for i, ue in enumerate(m.ue_ids):
        lines.append(str(ue) + "," + ",".join(repr(float(v)) for v in m.values[i]))
    return "\n".join(lines) + "\n"


def features_from_csv(text: str) -> FeatureMatrix:
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ValueError("empty feature CSV")
    header = lines[0].split(",")
    if header[0] != "ue_id":
        raise ValueError('feature CSV header must start with "ue_id"')
    columns = header[1:]
    ue_ids = []
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ValueError(f"row has {len(parts)} fields, expected {len(header)}")
        ue_ids.append(int(parts[0]))
        rows.append([float(v) for v in parts[1:]])
    values = np.array(rows) if rows else np.zeros((0, len(columns)))
    return FeatureMatrix(ue_ids, columns, values)


def write_features_csv(m: FeatureMatrix, path: str | Path) -> None:
    Path(path).write_bytes(features_to_csv(m).encode())


def read_features_csv(path: str | Path) -> FeatureMatrix:
    return features_from_csv(Path(path).read_bytes().decode())
