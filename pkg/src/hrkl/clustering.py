"""Clustering of the embedding and kernel selection per cluster.

Both HDBSCAN and single-linkage HAC are built on the same primitive: a
Kruskal pass over all pairs sorted by ``(distance, i, j)``, which yields the
single-linkage merge sequence with index-ordered tie-breaking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import DistanceMatrix, Embedding, cosine_distances
from .errors import ValidationError
from .grammar import describe, parse

OUTLIER = -1
_MIN_DISTANCE = 1e-300


@dataclass(frozen=True)
class ClusterLabels:
    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if self.n_clusters < 0 or np.any((labels < OUTLIER) | (labels >= self.n_clusters)):
            raise ValidationError(f"labels out of range for {self.n_clusters} clusters")
        object.__setattr__(self, "labels", labels)

    @property
    def n_outliers(self) -> int:
        return int(np.sum(self.labels == OUTLIER))

    def members(self, c) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class Dendrogram:
    """Merge list; leaves are 0..J-1, the t-th merge creates node J+t."""

    merges: tuple
    n_leaves: int

    def to_json(self) -> list:
        return [
            {"left": int(a), "right": int(b), "height": float(h), "size": int(s)}
            for a, b, h, s in self.merges
        ]

    def to_dot(self, labels=None) -> str:
        labels = labels or [str(i) for i in range(self.n_leaves)]
        lines = ["graph dendrogram {"]
        for i, name in enumerate(labels):
            lines.append(f'  n{i} [label="{name}", shape=box];')
        for t, (a, b, h, _) in enumerate(self.merges):
            node = self.n_leaves + t
            lines.append(f'  n{node} [label="{h:.4g}", shape=point];')
            lines.append(f"  n{node} -- n{a};")
            lines.append(f"  n{node} -- n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def as_linkage(self) -> np.ndarray:
        """SciPy-style ``(J-1) x 4`` linkage matrix."""
        return np.array([[a, b, h, s] for a, b, h, s in self.merges], dtype=float)


def _as_square(P) -> np.ndarray:
    D = np.asarray(getattr(P, "P", P), dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError("expected a square distance matrix")
    return D


def single_linkage_merges(D) -> list:
    """Kruskal over the complete graph: ``[(left, right, height, size), ...]``."""
    D = _as_square(D)
    J = len(D)
    iu, ju = np.triu_indices(J, k=1)
    w = D[iu, ju]
    order = np.lexsort((ju, iu, w))
    parent = list(range(J))
    node_of = list(range(J))
    size = [1] * J

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    merges = []
    for idx in order:
        ra, rb = find(int(iu[idx])), find(int(ju[idx]))
        if ra == rb:
            continue
        left, right = sorted((node_of[ra], node_of[rb]))
        parent[rb] = ra
        size[ra] += size[rb]
        node_of[ra] = J + len(merges)
        merges.append((left, right, float(w[idx]), size[ra]))
        if len(merges) == J - 1:
            break
    return merges


def hac_single_linkage(data, metric: str = "euclidean") -> Dendrogram:
    """Single-linkage agglomerative clustering.

    ``data`` is an :class:`Embedding`, a :class:`DistanceMatrix`, or a 2-D
    array of feature rows (``metric="precomputed"`` to treat it as
    distances).  Ties go to the smallest index pair.
    """
    if isinstance(data, DistanceMatrix) or metric == "precomputed":
        D = _as_square(data)
    else:
        E = np.asarray(getattr(data, "E", data), dtype=float)
        if metric == "euclidean":
            D = np.sqrt(np.sum((E[:, None, :] - E[None, :, :]) ** 2, axis=-1))
        elif metric == "cosine":
            D = cosine_distances(E).P
        else:
            raise ValidationError(f"unknown metric {metric!r}")
    J = len(D)
    if J < 2:
        raise ValidationError("HAC needs at least 2 points")
    return Dendrogram(tuple(single_linkage_merges(D)), J)


def cut_dendrogram(d: Dendrogram, c: int) -> ClusterLabels:
    """Undo the ``c - 1`` highest merges; clusters numbered by smallest member."""
    J = d.n_leaves
    if not 1 <= c <= J:
        raise ValidationError(f"cluster count must be in [1, {J}], got {c}")
    members = {i: [i] for i in range(J)}
    for t, (a, b, _, _) in enumerate(d.merges[: J - c]):
        members[J + t] = members.pop(a) + members.pop(b)
    groups = sorted((min(m), m) for m in members.values())
    labels = np.empty(J, dtype=int)
    for label, (_, m) in enumerate(groups):
        labels[m] = label
    return ClusterLabels(labels, c)


def _leaves_under(node, J, children):
    stack, out = [node], []
    while stack:
        v = stack.pop()
        if v < J:
            out.append(v)
        else:
            stack.extend(children[v])
    return out


def hdbscan(P, min_cluster_size: int = 3, min_samples=None) -> ClusterLabels:
    """HDBSCAN* on a precomputed distance matrix.

    Core distance is the distance to the ``min_samples``-th nearest point
    counting the point itself.  Flat clusters come from excess-of-mass
    selection on the condensed tree; the root is never selected, and points
    outside every selected cluster are labelled -1.
    """
    if min_cluster_size < 2:
        raise ValidationError("min_cluster_size must be >= 2")
    D = _as_square(P)
    J = len(D)
    if J < min_cluster_size:
        return ClusterLabels(np.full(J, OUTLIER), 0)
    min_samples = min_cluster_size if min_samples is None else min_samples
    k = min(min_samples, J) - 1
    core = np.partition(D, k, axis=1)[:, k]
    mreach = np.maximum(D, np.maximum(core[:, None], core[None, :]))
    merges = single_linkage_merges(mreach)

    children = {J + t: (a, b) for t, (a, b, _, _) in enumerate(merges)}
    height = {J + t: h for t, (_, _, h, _) in enumerate(merges)}
    size = {i: 1 for i in range(J)}
    size.update({J + t: s for t, (_, _, _, s) in enumerate(merges)})

    # Condensed tree: (parent cluster, child cluster or point, lambda, size).
    root = 2 * J - 2
    n_clusters = 1
    birth = {0: 0.0}
    edges = []
    stack = [(root, 0)]
    while stack:
        node, cluster = stack.pop()
        if node < J:
            continue
        lam = 1.0 / max(height[node], _MIN_DISTANCE)
        left, right = children[node]
        big = [c for c in (left, right) if size[c] >= min_cluster_size]
        if len(big) == 2:
            for child in (left, right):
                new = n_clusters
                n_clusters += 1
                birth[new] = lam
                edges.append((cluster, new, lam, size[child], True))
                stack.append((child, new))
        else:
            for child in (left, right):
                if child in big:
                    stack.append((child, cluster))
                else:
                    for leaf in _leaves_under(child, J, children):
                        edges.append((cluster, leaf, lam, 1, False))

    stability = {c: 0.0 for c in range(n_clusters)}
    child_clusters = {c: [] for c in range(n_clusters)}
    cluster_parent = {}
    point_parent = np.empty(J, dtype=int)
    for parent, child, lam, sz, is_cluster in edges:
        stability[parent] += (lam - birth[parent]) * sz
        if is_cluster:
            child_clusters[parent].append(child)
            cluster_parent[child] = parent
        else:
            point_parent[child] = parent

    # Excess of mass, bottom-up; children always carry larger ids.
    selected = {c: True for c in range(1, n_clusters)}
    for c in range(n_clusters - 1, 0, -1):
        subtree = sum(stability[ch] for ch in child_clusters[c])
        if subtree > stability[c]:
            selected[c] = False
            stability[c] = subtree
        else:
            stack = list(child_clusters[c])
            while stack:
                d = stack.pop()
                selected[d] = False
                stack.extend(child_clusters[d])

    chosen = sorted(c for c, keep in selected.items() if keep)
    label_of = {c: i for i, c in enumerate(chosen)}
    labels = np.full(J, OUTLIER)
    for i in range(J):
        c = int(point_parent[i])
        while c != 0 and c not in label_of:
            c = cluster_parent[c]
        if c in label_of:
            labels[i] = label_of[c]
    return ClusterLabels(labels, len(chosen))


def select_cluster_kernel(B, members):
    """Kernel minimizing the summed BIC over ``members``.

    Ties go to the lexicographically smallest column id.  With a plain
    array the column index is returned instead of a kernel string.
    """
    values = np.asarray(getattr(B, "values", B), dtype=float)
    members = sorted(set(int(m) for m in members))
    if not members:
        raise ValidationError("select_cluster_kernel needs at least one member")
    totals = values[members].sum(axis=0)
    best = np.flatnonzero(totals == totals.min())
    col_ids = getattr(B, "col_ids", None)
    if col_ids is None:
        return int(best[0])
    return min(col_ids[k] for k in best)


def select_shared_kernel(B):
    """One kernel for every series: summed BIC over all rows."""
    values = np.asarray(getattr(B, "values", B))
    if values.size == 0:
        raise ValidationError("select_shared_kernel needs a non-empty matrix")
    return select_cluster_kernel(B, range(values.shape[0]))


def describe_clusters(B, labels) -> list:
    """Selected kernel and its description for every cluster (outliers skipped)."""
    labels = np.asarray(getattr(labels, "labels", labels), dtype=int)
    row_ids = list(getattr(B, "row_ids", range(len(labels))))
    out = []
    for c in sorted(set(labels.tolist()) - {OUTLIER}):
        members = np.flatnonzero(labels == c)
        kernel = select_cluster_kernel(B, members)
        entry = {"cluster": int(c), "size": int(len(members)), "members": [row_ids[m] for m in members]}
        if isinstance(kernel, str):
            entry["kernel"] = kernel
            entry["description"] = describe(parse(kernel))
        else:
            entry["kernel_index"] = kernel
        out.append(entry)
    return out


def write_labels_csv(ids, labels, path) -> None:
    labels = np.asarray(getattr(labels, "labels", labels), dtype=int)
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("series_id,cluster\n")
        for sid, lab in zip(ids, labels):
            fh.write(f"{sid},{int(lab)}\n")


def write_dendrogram_json(d: Dendrogram, path) -> None:
    Path(path).write_text(json.dumps(d.to_json(), indent=1) + "\n", encoding="utf-8")
