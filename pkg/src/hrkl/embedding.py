"""Row-standardized BIC embedding and pairwise distances between its rows."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

DEGENERATE_STD = 1e-12


@dataclass(frozen=True)
class Embedding:
    E: np.ndarray
    row_ids: tuple
    col_ids: tuple
    degenerate_rows: frozenset = frozenset()

    def to_csv(self, path) -> None:
        _write_matrix(path, self.row_ids, self.col_ids, self.E)


@dataclass(frozen=True)
class DistanceMatrix:
    P: np.ndarray
    ids: tuple
    metric: str
    flagged_pairs: frozenset = field(default=frozenset(), compare=False)

    def to_csv(self, path) -> None:
        _write_matrix(path, self.ids, self.ids, self.P)


def _write_matrix(path, row_ids, col_ids, M):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series_id", *col_ids])
        for rid, row in zip(row_ids, M):
            w.writerow([rid, *(f"{v:.17g}" for v in row)])


def standardize_rows(B) -> Embedding:
    """Z-score every row of the BIC matrix (population std).

    Accepts a :class:`~hrkl.sweep.BicMatrix` or a plain 2-D array.  Rows
    with std below 1e-12 become zero rows and are listed in
    ``degenerate_rows``.
    """
    values = np.asarray(getattr(B, "values", B), dtype=float)
    if values.ndim != 2 or values.shape[1] < 2:
        raise ValidationError("standardize_rows needs a 2-D matrix with at least 2 columns")
    row_ids = tuple(getattr(B, "row_ids", range(values.shape[0])))
    col_ids = tuple(getattr(B, "col_ids", range(values.shape[1])))
    mean = values.mean(axis=1, keepdims=True)
    std = values.std(axis=1, keepdims=True)
    degenerate = std[:, 0] < DEGENERATE_STD
    E = np.zeros_like(values)
    ok = ~degenerate
    E[ok] = (values[ok] - mean[ok]) / std[ok]
    return Embedding(E, row_ids, col_ids, frozenset(np.flatnonzero(degenerate).tolist()))


def cosine_distances(emb) -> DistanceMatrix:
    """``1 - cos`` between embedding rows.

    Pairs involving an all-zero row get distance 1 and are recorded in
    ``flagged_pairs``; the diagonal is always 0.
    """
    E = np.asarray(getattr(emb, "E", emb), dtype=float)
    ids = tuple(getattr(emb, "row_ids", range(E.shape[0])))
    norms = np.linalg.norm(E, axis=1)
    zero = norms == 0
    U = np.zeros_like(E)
    U[~zero] = E[~zero] / norms[~zero, None]
    P = 1.0 - U @ U.T
    P[zero, :] = 1.0
    P[:, zero] = 1.0
    P = np.clip(0.5 * (P + P.T), 0.0, 2.0)
    np.fill_diagonal(P, 0.0)
    flagged = frozenset(
        (int(i), int(j)) for i in np.flatnonzero(zero) for j in range(len(ids)) if i != j
    )
    return DistanceMatrix(P, ids, "cosine", flagged)


def euclidean_distances(emb) -> DistanceMatrix:
    E = np.asarray(getattr(emb, "E", emb), dtype=float)
    ids = tuple(getattr(emb, "row_ids", range(E.shape[0])))
    sq = np.sum(E**2, axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2 * E @ E.T, 0.0)
    P = np.sqrt(0.5 * (D2 + D2.T))
    np.fill_diagonal(P, 0.0)
    return DistanceMatrix(P, ids, "euclidean")


def read_distance_csv(path) -> DistanceMatrix:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    ids = tuple(rows[0][1:])
    P = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    if P.shape != (len(ids), len(ids)):
        raise ValidationError(f"{path}: distance matrix is not square")
    return DistanceMatrix(P, ids, "precomputed")
