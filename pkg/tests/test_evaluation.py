import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrkl.errors import ValidationError
from hrkl.evaluation import cluster_metrics, outliers_as_singletons


def test_perfect():
    r = cluster_metrics([0, 0, 1, 1, 2], [1, 1, 0, 0, 5])
    assert (r.homogeneity, r.completeness, r.v_measure) == (1.0, 1.0, 1.0)


def test_single_cluster_balanced_classes():
    r = cluster_metrics([0, 0, 1, 1], [0, 0, 0, 0])
    assert r.homogeneity == pytest.approx(0.0)
    assert r.completeness == 1.0
    assert r.v_measure == pytest.approx(0.0)


def test_hand_computed_case():
    # truth [0,0,1,1], prediction [0,1,1,1]
    r = cluster_metrics([0, 0, 1, 1], [0, 1, 1, 1])
    h_c = math.log(2)
    h_c_given_k = -(3 / 4) * ((1 / 3) * math.log(1 / 3) + (2 / 3) * math.log(2 / 3))
    h_k = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75))
    h_k_given_c = -(2 / 4) * (0.5 * math.log(0.5) * 2)
    h = 1 - h_c_given_k / h_c
    c = 1 - h_k_given_c / h_k
    assert r.homogeneity == pytest.approx(h)
    assert r.completeness == pytest.approx(c)
    assert r.v_measure == pytest.approx(2 * h * c / (h + c))


def test_outliers_become_singletons():
    np.testing.assert_array_equal(outliers_as_singletons([0, -1, 1, -1]), [0, 2, 1, 3])
    r = cluster_metrics([0, 0, 1, 1], [0, -1, -1, 1])
    assert r.n_outliers == 2 and r.n_clusters == 2
    assert r.homogeneity == 1.0


def test_errors():
    with pytest.raises(ValidationError):
        cluster_metrics([0, 1], [0])
    with pytest.raises(ValidationError):
        cluster_metrics([0, -1], [0, 0])


labels = st.lists(st.integers(0, 4), min_size=2, max_size=40)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_matches_sklearn(data):
    from sklearn.metrics import homogeneity_completeness_v_measure

    truth = data.draw(labels)
    pred = data.draw(st.lists(st.integers(-1, 4), min_size=len(truth), max_size=len(truth)))
    r = cluster_metrics(truth, pred)
    expected = homogeneity_completeness_v_measure(truth, outliers_as_singletons(pred))
    np.testing.assert_allclose([r.homogeneity, r.completeness, r.v_measure], expected, atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(labels, labels, st.permutations(range(5)))
def test_relabel_invariance_and_duality(truth, pred, perm):
    pred = (pred * 2)[: len(truth)]
    pred = pred + [0] * (len(truth) - len(pred))
    r = cluster_metrics(truth, pred)
    relabelled = cluster_metrics(truth, [perm[p] for p in pred])
    assert relabelled.v_measure == pytest.approx(r.v_measure)
    swapped = cluster_metrics(pred, truth)
    assert swapped.homogeneity == pytest.approx(r.completeness)
    assert swapped.completeness == pytest.approx(r.homogeneity)
