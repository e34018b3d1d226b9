import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from hrkl.clustering import (
    OUTLIER,
    ClusterLabels,
    cut_dendrogram,
    describe_clusters,
    hac_single_linkage,
    hdbscan,
    select_cluster_kernel,
    select_shared_kernel,
    single_linkage_merges,
    write_dendrogram_json,
)
from hrkl.errors import ValidationError
from hrkl.sweep import BicMatrix

from oracles import brute_single_linkage_heights


def blobs(seed, centers, per, spread=0.05):
    rng = np.random.default_rng(seed)
    pts = [c + spread * rng.normal(size=(per, len(c))) for c in np.asarray(centers, float)]
    truth = np.repeat(np.arange(len(centers)), per)
    return np.vstack(pts), truth


def same_partition(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return all(len(set(b[a == v])) == 1 for v in set(a)) and all(len(set(a[b == v])) == 1 for v in set(b))


def test_hand_fixture_two_groups_and_an_outlier():
    X = np.array([[0.0], [0.1], [0.2], [0.3], [5.0], [5.1], [5.2], [5.3], [20.0]])
    labels = hdbscan(cdist(X, X), min_cluster_size=3)
    assert labels.n_clusters == 2
    assert len(set(labels.labels[:4])) == 1 and len(set(labels.labels[4:8])) == 1
    assert labels.labels[0] != labels.labels[4]
    assert labels.labels[8] == OUTLIER


def test_too_few_points_are_all_noise():
    labels = hdbscan(np.zeros((2, 2)), min_cluster_size=3)
    assert labels.n_clusters == 0 and np.all(labels.labels == OUTLIER)


def test_min_cluster_size_validation():
    with pytest.raises(ValidationError):
        hdbscan(np.zeros((4, 4)), min_cluster_size=1)


@pytest.mark.parametrize("seed", range(8))
def test_hdbscan_matches_sklearn_without_ties(seed):
    from sklearn.cluster import HDBSCAN

    rng = np.random.default_rng(seed)
    X, _ = blobs(seed, rng.uniform(-3, 3, size=(3, 2)), 8, spread=0.4)
    X = np.vstack([X, rng.uniform(-6, 6, size=(4, 2))])
    D = cdist(X, X)
    ours = hdbscan(D, min_cluster_size=4, min_samples=1).labels
    theirs = HDBSCAN(min_cluster_size=4, min_samples=1, metric="precomputed").fit(D).labels_
    assert same_partition(ours, theirs)
    np.testing.assert_array_equal(ours == OUTLIER, theirs == -1)


def test_single_linkage_heights_match_brute_force():
    X = np.random.default_rng(3).normal(size=(25, 3))
    D = cdist(X, X)
    heights = [h for _, _, h, _ in single_linkage_merges(D)]
    np.testing.assert_allclose(heights, brute_single_linkage_heights(D))


def test_single_linkage_matches_scipy():
    from scipy.cluster.hierarchy import fcluster, linkage
    from scipy.spatial.distance import squareform

    X = np.random.default_rng(4).normal(size=(30, 2))
    tree = hac_single_linkage(X)
    Z = linkage(squareform(cdist(X, X), checks=False), method="single")
    np.testing.assert_allclose(tree.as_linkage()[:, 2], Z[:, 2])
    for c in (2, 3, 5):
        ours = cut_dendrogram(tree, c).labels
        theirs = fcluster(Z, c, criterion="maxclust")
        assert same_partition(ours, theirs)


def test_cut_labels_by_smallest_member():
    X = np.array([[10.0], [0.0], [10.1], [0.1]])
    labels = cut_dendrogram(hac_single_linkage(X), 2).labels
    np.testing.assert_array_equal(labels, [0, 1, 0, 1])
    assert np.all(cut_dendrogram(hac_single_linkage(X), 1).labels == 0)
    np.testing.assert_array_equal(cut_dendrogram(hac_single_linkage(X), 4).labels, [0, 1, 2, 3])
    with pytest.raises(ValidationError):
        cut_dendrogram(hac_single_linkage(X), 5)


def test_ties_merge_smallest_pair_first():
    D = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)
    merges = single_linkage_merges(D)
    assert merges[0][:2] == (0, 1)
    assert merges[1][:2] == (2, 3)


def test_dendrogram_exports(tmp_path):
    tree = hac_single_linkage(np.random.default_rng(0).normal(size=(5, 2)))
    path = tmp_path / "d.json"
    write_dendrogram_json(tree, path)
    data = json.loads(path.read_text())
    assert len(data) == 4 and data[-1]["size"] == 5
    assert tree.to_dot(list("abcde")).startswith("graph dendrogram {")


def test_cosine_metric_option():
    X = np.array([[1.0, 0.0], [2.0, 0.1], [0.0, 1.0], [0.1, 3.0]])
    labels = cut_dendrogram(hac_single_linkage(X, metric="cosine"), 2).labels
    np.testing.assert_array_equal(labels, [0, 0, 1, 1])
    with pytest.raises(ValidationError):
        hac_single_linkage(X, metric="manhattan")


def test_kernel_selection_and_ties():
    B = BicMatrix(np.array([[1.0, 1.0, 5.0], [2.0, 2.0, 0.0]]), ["s0", "s1"], ["SE", "LIN", "PER"])
    assert select_cluster_kernel(B, [0]) == "LIN"  # tie goes to the smaller string
    assert select_cluster_kernel(B, [1]) == "PER"
    assert select_shared_kernel(B) == "LIN"
    assert select_cluster_kernel(B.values, [1]) == 2
    with pytest.raises(ValidationError):
        select_cluster_kernel(B, [])


def test_describe_clusters_skips_outliers():
    B = BicMatrix(np.array([[0.0, 9.0], [1.0, 9.0], [9.0, 0.0]]), ["a", "b", "c"], ["LIN", "PER*SE"])
    out = describe_clusters(B, ClusterLabels([0, 0, -1], 1))
    assert len(out) == 1
    assert out[0]["kernel"] == "LIN" and out[0]["members"] == ["a", "b"]
    assert out[0]["description"] == ["a linear function"]


def test_cluster_labels_validation():
    with pytest.raises(ValidationError):
        ClusterLabels([0, 2], 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(4, 30), st.integers(2, 5))
def test_hdbscan_invariants(seed, J, m):
    X = np.random.default_rng(seed).normal(size=(J, 2))
    labels = hdbscan(cdist(X, X), min_cluster_size=m)
    counts = np.bincount(labels.labels[labels.labels >= 0], minlength=labels.n_clusters)
    assert np.all(counts >= m) or labels.n_clusters == 0
    assert set(labels.labels[labels.labels >= 0]) == set(range(labels.n_clusters))
    perm = np.random.default_rng(seed + 1).permutation(J)
    # Reordering the points must not change the partition.  Core distances
    # create ties in mutual reachability, so compare with min_samples=1.
    plain = hdbscan(cdist(X, X), min_cluster_size=m, min_samples=1).labels
    permuted = hdbscan(cdist(X[perm], X[perm]), min_cluster_size=m, min_samples=1).labels
    assert same_partition(plain[perm], permuted)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 20))
def test_merge_heights_are_monotone(seed, J):
    X = np.random.default_rng(seed).normal(size=(J, 3))
    merges = single_linkage_merges(cdist(X, X))
    heights = [h for _, _, h, _ in merges]
    assert len(merges) == J - 1 and merges[-1][3] == J
    assert heights == sorted(heights)
