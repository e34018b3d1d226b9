"""Homogeneity, completeness and V-measure against known classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class MetricReport:
    homogeneity: float
    completeness: float
    v_measure: float
    contingency: np.ndarray
    n_clusters: int
    n_outliers: int

    def to_dict(self) -> dict:
        return {
            "homogeneity": self.homogeneity,
            "completeness": self.completeness,
            "v_measure": self.v_measure,
            "n_clusters": self.n_clusters,
            "n_outliers": self.n_outliers,
        }


def outliers_as_singletons(pred) -> np.ndarray:
    """Give every ``-1`` its own fresh cluster id."""
    pred = np.array(pred, dtype=int)
    out = pred < 0
    start = pred.max(initial=-1) + 1
    pred[out] = start + np.arange(out.sum())
    return pred


def _entropy(counts) -> float:
    counts = counts[counts > 0]
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def _conditional_entropy(table) -> float:
    """H(rows | columns) for a contingency table of counts."""
    n = table.sum()
    col = table.sum(axis=0)
    h = 0.0
    for k in np.flatnonzero(col):
        nz = table[:, k][table[:, k] > 0]
        h -= float((nz / n * np.log(nz / col[k])).sum())
    return h


def cluster_metrics(truth, pred) -> MetricReport:
    """Entropy-based external scores with natural logs.

    Predicted outliers (``-1``) each count as a singleton cluster.
    """
    truth = np.asarray(truth, dtype=int)
    raw = np.asarray(getattr(pred, "labels", pred), dtype=int)
    if truth.shape != raw.shape:
        raise ValidationError(f"truth has {truth.size} labels but prediction has {raw.size}")
    if np.any(truth < 0):
        raise ValidationError("ground-truth labels must be non-negative")
    pred_ = outliers_as_singletons(raw)

    classes, ci = np.unique(truth, return_inverse=True)
    clusters, ki = np.unique(pred_, return_inverse=True)
    table = np.zeros((len(classes), len(clusters)), dtype=int)
    np.add.at(table, (ci, ki), 1)

    h_c = _entropy(table.sum(axis=1).astype(float))
    h_k = _entropy(table.sum(axis=0).astype(float))
    homogeneity = 1.0 if h_c == 0 else 1.0 - _conditional_entropy(table) / h_c
    completeness = 1.0 if h_k == 0 else 1.0 - _conditional_entropy(table.T) / h_k
    homogeneity = min(max(homogeneity, 0.0), 1.0)
    completeness = min(max(completeness, 0.0), 1.0)
    total = homogeneity + completeness
    v = 0.0 if total == 0 else 2 * homogeneity * completeness / total
    n_clusters = len(set(raw[raw >= 0].tolist()))
    return MetricReport(homogeneity, completeness, v, table, n_clusters, int(np.sum(raw < 0)))
