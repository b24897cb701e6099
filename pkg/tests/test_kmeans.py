import numpy as np
import pytest

from helpers_oracles import optimal_sse
from sliceprof.kmeans import (
    KMeansResult,
    centroid,
    kmeans,
    kmeans_restarts,
    result_to_document,
    sse,
)


# --------------------------------------------------------------------------
# objective and centroid


def test_sse_zero_when_points_equal_centroids():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert sse(x, [0, 1], x) == 0.0


def test_sse_direct_evaluation():
    points = np.array([[0.0, 0.0], [2.0, 0.0]])
    assert sse(points, [0, 0], np.array([[1.0, 0.0]])) == 2.0


def test_sse_rejects_out_of_range_assignment():
    x = np.array([[0.0], [1.0]])
    with pytest.raises(ValueError):
        sse(x, [0, 2], np.array([[0.0], [1.0]]))


def test_centroid_single_point():
    np.testing.assert_array_equal(centroid(np.array([[3.0, 7.0]])), [3.0, 7.0])


def test_centroid_symmetric_pair():
    np.testing.assert_array_equal(
        centroid(np.array([[-2.5, -1.0], [2.5, 1.0]])), [0.0, 0.0]
    )


def test_centroid_mean():
    pts = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    np.testing.assert_array_equal(centroid(pts), [3.0, 4.0])


def test_centroid_empty_errors():
    with pytest.raises(ValueError):
        centroid(np.zeros((0, 2)))


# --------------------------------------------------------------------------
# Lloyd iteration


def test_k_equals_n_gives_zero_sse():
    x = np.array([[0.0], [5.0], [9.0]])
    result = kmeans(x, 3, seed=1)
    assert result.sse == 0.0
    assert sorted(result.assignment.tolist()) == [0, 1, 2]


def test_k_one_gives_global_mean():
    x = np.array([[0.0, 0.0], [4.0, 0.0], [8.0, 6.0]])
    result = kmeans(x, 1, seed=0)
    np.testing.assert_allclose(result.centroids[0], x.mean(axis=0))
    expected = ((x - x.mean(axis=0)) ** 2).sum()
    assert abs(result.sse - expected) <= 1e-12


def test_two_cluster_line_fixture():
    # exhaustive enumeration confirms {0,1} vs {9,10} is optimal with sse 1.0
    x = np.array([[0.0], [1.0], [9.0], [10.0]])
    assert optimal_sse(x, 2) == 1.0
    result = kmeans_restarts(x, 2, restarts=10, seed=0)
    assert result.sse == 1.0
    assert result.assignment[0] == result.assignment[1]
    assert result.assignment[2] == result.assignment[3]
    assert sorted(result.centroids[:, 0].tolist()) == [0.5, 9.5]


def test_input_validation():
    x = np.array([[0.0], [1.0]])
    with pytest.raises(ValueError):
        kmeans(x, 0)
    with pytest.raises(ValueError):
        kmeans(x, 3)
    with pytest.raises(ValueError):
        kmeans(np.array([[np.nan], [0.0]]), 1)
    with pytest.raises(ValueError):
        kmeans(x, 1, max_iter=0)
    with pytest.raises(ValueError):
        kmeans(x, 1, tol=-1.0)
    with pytest.raises(ValueError):
        kmeans(x, 1, init="random-walk")


def random_instance(seed):
    gen = np.random.default_rng(seed)
    n = int(gen.integers(4, 13))
    d = int(gen.integers(1, 4))
    k = int(gen.integers(2, min(n, 3) + 1))
    return gen.normal(size=(n, d)) * gen.uniform(0.5, 3.0), k


@pytest.mark.parametrize("init", ["kpp", "forgy"])
def test_monotone_sse_trace_and_fixed_point(init):
    for seed in range(60):
        x, k = random_instance(seed)
        result = kmeans(x, k, init=init, seed=seed)
        for prev, cur in zip(result.sse_trace, result.sse_trace[1:]):
            assert cur <= prev * (1.0 + 1e-12) + 1e-15
        # converged centroids equal member means (empty clusters impossible here)
        for j in range(k):
            members = x[result.assignment == j]
            assert members.size
            np.testing.assert_allclose(result.centroids[j], members.mean(axis=0), rtol=1e-9)


def test_stability_exit_is_a_fixed_point():
    x, k = random_instance(11)
    result = kmeans(x, k, seed=11)
    dist = ((x[:, None, :] - result.centroids[None, :, :]) ** 2).sum(axis=2)
    np.testing.assert_array_equal(np.argmin(dist, axis=1), result.assignment)


def test_restarts_one_equals_plain_kmeans():
    x, k = random_instance(5)
    a = kmeans(x, k, seed=17)
    b = kmeans_restarts(x, k, restarts=1, seed=17)
    np.testing.assert_array_equal(a.assignment, b.assignment)
    assert a.sse == b.sse


def test_restarts_deterministic():
    x, k = random_instance(8)
    a = kmeans_restarts(x, k, restarts=7, seed=3)
    b = kmeans_restarts(x, k, restarts=7, seed=3)
    np.testing.assert_array_equal(a.assignment, b.assignment)
    np.testing.assert_array_equal(a.centroids, b.centroids)
    assert a.sse == b.sse and a.sse_trace == b.sse_trace


def test_three_blob_fixture_attains_enumerated_optimum():
    gen = np.random.default_rng(0)
    blobs = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)]
    x = np.vstack([gen.normal(loc=c, scale=0.3, size=(3, 2)) for c in blobs])
    best = optimal_sse(x, 3)
    result = kmeans_restarts(x, 3, restarts=20, seed=1)
    assert result.sse <= best * (1.0 + 1e-9)


def test_permutation_equivariance_via_optimum():
    x, k = random_instance(23)
    gen = np.random.default_rng(99)
    perm = gen.permutation(len(x))
    assert abs(optimal_sse(x, k) - optimal_sse(x[perm], k)) <= 1e-9 * max(1.0, optimal_sse(x, k))
    a = kmeans_restarts(x, k, restarts=50, seed=0)
    b = kmeans_restarts(x[perm], k, restarts=50, seed=0)
    assert abs(a.sse - b.sse) <= 1e-9 * max(1.0, a.sse)


def test_duplicate_points_fill_all_clusters():
    x = np.zeros((5, 2))
    result = kmeans(x, 3, seed=0)
    assert result.sse == 0.0
    assert len(set(result.assignment.tolist())) == 3


def test_result_document_shape():
    x = np.array([[0.0], [1.0], [9.0], [10.0]])
    result = kmeans_restarts(x, 2, restarts=5, seed=0)
    doc = result_to_document(result, [10, 11, 12, 13], ["f"])
    assert set(doc) == {"k", "assignment", "centroids", "sse", "iterations", "sse_trace"}
    assert doc["assignment"]["10"] == doc["assignment"]["11"]
    assert len(doc["centroids"]) == 2 and "f" in doc["centroids"][0]
    assert doc["sse_trace"][-1] == doc["sse"]
