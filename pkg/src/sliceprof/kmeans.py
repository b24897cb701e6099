"""Lloyd's K-means minimizing within-cluster squared Euclidean error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix


@dataclass
class KMeansResult:
    k: int
    assignment: np.ndarray
    centroids: np.ndarray
    sse: float
    iterations: int
    sse_trace: list[float]


def _as_values(data) -> np.ndarray:
    if isinstance(data, FeatureMatrix):
        return data.values
    return np.asarray(data, dtype=float)


def sse(points, assignment, centroids) -> float:
    """Sum of squared Euclidean distances of points to their assigned centroids."""
    x = _as_values(points)
    c = _as_values(centroids)
    a = np.asarray(assignment, dtype=int)
    if len(a) != len(x):
        raise ValueError("assignment length does not match points")
    if a.size and (a.min() < 0 or a.max() >= len(c)):
        raise ValueError("cluster index out of range")
    if x.size == 0:
        return 0.0
    return float(((x - c[a]) ** 2).sum())


def centroid(cluster_points) -> np.ndarray:
    """Component-wise mean of a non-empty cluster."""
    x = _as_values(cluster_points)
    if len(x) == 0:
        raise ValueError("centroid of empty cluster")
    return x.mean(axis=0)


def _init_kpp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            i = int(rng.choice(n, p=d2 / total))
        else:
            i = int(rng.integers(n))
        chosen.append(i)
        d2 = np.minimum(d2, ((x - x[i]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _init_forgy(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    return x[rng.choice(len(x), size=k, replace=False)].copy()


def kmeans(
    data,
    k: int,
    init: str = "kpp",
    max_iter: int = 300,
    tol: float = 1e-9,
    seed: int = 0,
) -> KMeansResult:
    """Seeded Lloyd iteration.

    Points go to the nearest centroid (ties to the lowest cluster index),
    centroids are recomputed as member means, and iteration stops when the
    assignment is stable, the relative SSE change falls within ``tol``, or
    ``max_iter`` is reached. A cluster that empties is reseeded with the
    point currently farthest from its centroid.
    """
    x = _as_values(data)
    if x.ndim != 2:
        raise ValueError("points must be a 2-D matrix")
    n = len(x)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if not np.isfinite(x).all():
        raise ValueError("points must be finite")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if tol < 0:
        raise ValueError("tol must be >= 0")
    rng = np.random.default_rng(seed)
    if init == "kpp":
        centroids = _init_kpp(x, k, rng)
    elif init == "forgy":
        centroids = _init_forgy(x, k, rng)
    else:
        raise ValueError(f"unknown init {init!r}")

    trace: list[float] = []
    prev_assign: np.ndarray | None = None
    prev_sse: float | None = None
    assignment = np.zeros(n, dtype=int)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        dist = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assignment = np.argmin(dist, axis=1)
        point_d = dist[np.arange(n), assignment]
        counts = np.bincount(assignment, minlength=k)
        # reseed each empty cluster with the farthest point of a cluster that
        # can spare one (k <= n guarantees such a point exists)
        while True:
            empties = np.flatnonzero(counts == 0)
            if empties.size == 0:
                break
            j = int(empties[0])
            eligible = counts[assignment] >= 2
            i = int(np.argmax(np.where(eligible, point_d, -np.inf)))
            counts[assignment[i]] -= 1
            assignment[i] = j
            counts[j] += 1
            point_d[i] = -np.inf
        sums = np.zeros((k, x.shape[1]))
        np.add.at(sums, assignment, x)
        centroids = sums / counts[:, None]
        current = float(((x - centroids[assignment]) ** 2).sum())
        trace.append(current)
        if prev_assign is not None and np.array_equal(assignment, prev_assign):
            break
        if prev_sse is not None and abs(prev_sse - current) <= tol * max(1.0, current):
            break
        prev_assign = assignment
        prev_sse = current
    return KMeansResult(k, assignment, centroids, trace[-1], iterations, trace)


def kmeans_restarts(
    data,
    k: int,
    restarts: int = 10,
    init: str = "kpp",
    max_iter: int = 300,
    tol: float = 1e-9,
    seed: int = 0,
) -> KMeansResult:
    """Best of ``restarts`` runs seeded seed, seed+1, ...; ties keep the lowest seed."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best: KMeansResult | None = None
    for r in range(restarts):
        result = kmeans(data, k, init=init, max_iter=max_iter, tol=tol, seed=seed + r)
        if best is None or result.sse < best.sse:
            best = result
    return best


def result_to_document(
    result: KMeansResult, ue_ids: list[int], columns: list[str]
) -> dict:
    """Machine-readable result: per-UE assignment, named centroids, SSE trace."""
    return {
        "k": result.k,
        "assignment": {
            str(ue): int(c) for ue, c in zip(ue_ids, result.assignment)
        },
        "centroids": [
            {name: float(v) for name, v in zip(columns, row)}
            for row in result.centroids
        ],
        "sse": float(result.sse),
        "iterations": result.iterations,
        "sse_trace": [float(v) for v in result.sse_trace],
    }
