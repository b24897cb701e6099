"""Agglomerative clustering over pairwise dissimilarities with dendrogram cuts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix

METRICS = ("euclidean", "cosine", "jaccard")
LINKAGES = ("average", "single", "complete")


@dataclass
class DistanceMatrix:
    n: int
    metric: str
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.n, self.n):
            raise ValueError("distance matrix must be n x n")
        if self.values.size == 0:
            return
        if not np.isfinite(self.values).all():
            raise ValueError("distances must be finite")
        if (self.values < 0).any():
            raise ValueError("distances must be >= 0")
        if np.abs(self.values - self.values.T).max() > 1e-12:
            raise ValueError("distance matrix must be symmetric")
        if np.abs(np.diag(self.values)).max() != 0.0:
            raise ValueError("diagonal must be exactly zero")


@dataclass(frozen=True)
class Merge:
    a: int
    b: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """n-1 merges over cluster ids 0..n-1 (leaves) then n, n+1, ... (merges)."""

    n_leaves: int
    merges: list[Merge]

    def __post_init__(self) -> None:
        n = self.n_leaves
        if len(self.merges) != max(n - 1, 0):
            raise ValueError(f"expected {n - 1} merges, got {len(self.merges)}")
        sizes = {i: 1 for i in range(n)}
        for step, m in enumerate(self.merges):
            for cid in (m.a, m.b):
                if cid not in sizes:
                    raise ValueError(f"merge {step} consumes unavailable cluster {cid}")
            if m.size != sizes[m.a] + sizes[m.b]:
                raise ValueError(f"merge {step} size mismatch")
            if m.height < 0:
                raise ValueError(f"merge {step} height must be >= 0")
            sizes[n + step] = sizes.pop(m.a) + sizes.pop(m.b)


def _as_values(data) -> np.ndarray:
    if isinstance(data, FeatureMatrix):
        return data.values
    return np.asarray(data, dtype=float)


def _pairwise_euclidean(x: np.ndarray) -> np.ndarray:
    d2 = ((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(np.maximum(d2, 0.0))


def _pairwise_cosine(x: np.ndarray) -> np.ndarray:
    norms = np.sqrt((x**2).sum(axis=1))
    if (norms == 0).any():
        raise ValueError("cosine distance undefined for all-zero rows")
    sim = (x @ x.T) / np.outer(norms, norms)
    return np.clip(1.0 - sim, 0.0, 2.0)


def _pairwise_jaccard(x: np.ndarray) -> np.ndarray:
    if (x < 0).any():
        raise ValueError("generalized Jaccard requires non-negative entries")
    n = len(x)
    d = np.zeros((n, n))
    for i in range(n):
        mins = np.minimum(x[i], x[i:]).sum(axis=1)
        maxs = np.maximum(x[i], x[i:]).sum(axis=1)
        with np.errstate(invalid="ignore"):
            row = np.where(maxs > 0, 1.0 - mins / np.where(maxs > 0, maxs, 1.0), 0.0)
        d[i, i:] = row
        d[i:, i] = row
    return d


def distance_matrix(data, metric: str = "euclidean") -> DistanceMatrix:
    """Pairwise dissimilarity matrix; exactly symmetric with a zero diagonal.

    cosine: 1 - x.y / (|x||y|), clamped to [0, 2]; generalized jaccard:
    1 - sum(min)/sum(max) over non-negative rows (0/0 -> 0); euclidean: |x-y|.
    """
    x = _as_values(data)
    if x.ndim != 2 or len(x) < 1:
        raise ValueError("need a non-empty 2-D matrix")
    if not np.isfinite(x).all():
        raise ValueError("matrix entries must be finite")
    if metric == "euclidean":
        d = _pairwise_euclidean(x)
    elif metric == "cosine":
        d = _pairwise_cosine(x)
    elif metric == "jaccard":
        d = _pairwise_jaccard(x)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    d = np.triu(d, 1)
    d = d + d.T
    return DistanceMatrix(len(x), metric, d)


def agglomerate(d: DistanceMatrix, linkage: str = "average") -> Dendrogram:
    """Greedy bottom-up merging of the closest active clusters.

    Cluster dissimilarities follow Lance-Williams updates (average =
    size-weighted mean, single = min, complete = max); ties break towards the
    lexicographically smallest id pair. Merge height is the linkage value at
    merge time.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    n = d.n
    if n == 1:
        return Dendrogram(1, [])
    total = 2 * n - 1
    # Upper triangle holds active pair dissimilarities; everything else +inf,
    # so a row-major argmin lands on the smallest (a, b) pair among ties.
    m = np.full((total, total), np.inf)
    iu = np.triu_indices(n, 1)
    m[iu] = d.values[iu]
    sizes = np.ones(total, dtype=int)
    active: list[int] = list(range(n))
    merges: list[Merge] = []
    for step in range(n - 1):
        flat = int(np.argmin(m))
        a, b = divmod(flat, total)
        height = float(m[a, b])
        new = n + step
        rest = np.array([c for c in active if c != a and c != b], dtype=int)
        if rest.size:
            dam = m[np.minimum(rest, a), np.maximum(rest, a)]
            dbm = m[np.minimum(rest, b), np.maximum(rest, b)]
            if linkage == "average":
                merged = (sizes[a] * dam + sizes[b] * dbm) / (sizes[a] + sizes[b])
            elif linkage == "single":
                merged = np.minimum(dam, dbm)
            else:
                merged = np.maximum(dam, dbm)
            m[rest, new] = merged
        m[a, :] = np.inf
        m[:, a] = np.inf
        m[b, :] = np.inf
        m[:, b] = np.inf
        sizes[new] = sizes[a] + sizes[b]
        merges.append(Merge(a, b, height, int(sizes[new])))
        active = [c for c in active if c != a and c != b] + [new]
    return Dendrogram(n, merges)


def cut(dend: Dendrogram, k: int) -> np.ndarray:
    """Flat k-clustering: undo the last k-1 merges.

    Clusters are labeled 0..k-1 by ascending smallest member leaf id.
    """
    n = dend.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for step, m in enumerate(dend.merges[: n - k]):
        members[n + step] = members.pop(m.a) + members.pop(m.b)
    groups = sorted(members.values(), key=min)
    assignment = np.empty(n, dtype=int)
    for label, leaves in enumerate(groups):
        assignment[leaves] = label
    return assignment


def dendrogram_rows(dend: Dendrogram) -> list[list[float]]:
    """Merge table in the usual linkage-matrix convention: [a, b, height, size]."""
    return [[float(m.a), float(m.b), m.height, float(m.size)] for m in dend.merges]
