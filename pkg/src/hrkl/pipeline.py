"""End-to-end helpers tying the sweep, embedding and clustering together."""

from __future__ import annotations

from dataclasses import dataclass, field

from .clustering import (
    ClusterLabels,
    Dendrogram,
    cut_dendrogram,
    describe_clusters,
    hac_single_linkage,
    hdbscan,
    select_shared_kernel,
)
from .embedding import Embedding, cosine_distances, standardize_rows


@dataclass
class ClusterResult:
    labels: ClusterLabels
    embedding: Embedding
    clusters: list = field(default_factory=list)
    shared_kernel: str = None
    dendrogram: Dendrogram = None


def cluster_bic(B, min_cluster_size: int = 3) -> ClusterResult:
    """Standardize rows, take cosine distances, run HDBSCAN, pick a kernel per cluster."""
    emb = standardize_rows(B)
    labels = hdbscan(cosine_distances(emb), min_cluster_size)
    return ClusterResult(labels, emb, describe_clusters(B, labels), select_shared_kernel(B))


def hac_bic(B, n_clusters: int, metric: str = "euclidean") -> ClusterResult:
    """Single-linkage HAC on the standardized embedding, cut into ``n_clusters``."""
    emb = standardize_rows(B)
    tree = hac_single_linkage(emb, metric)
    labels = cut_dendrogram(tree, n_clusters)
    return ClusterResult(labels, emb, describe_clusters(B, labels), select_shared_kernel(B), tree)

