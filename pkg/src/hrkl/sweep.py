"""The (series x kernel) BIC sweep and the BIC matrix file format."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import FitError, ParseError, SweepError, ValidationError
from .gp import FitConfig, fit
from .grammar import canonicalize

log = logging.getLogger(__name__)

SENTINEL_MARGIN = 10.0
MAX_FAILED_FRACTION = 0.5


@dataclass(frozen=True)
class BicMatrix:
    values: np.ndarray
    row_ids: tuple
    col_ids: tuple
    failed: np.ndarray = None
    report: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape != (len(self.row_ids), len(self.col_ids)):
            raise ValidationError(
                f"BIC matrix shape {values.shape} does not match "
                f"{len(self.row_ids)} series x {len(self.col_ids)} kernels"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("BIC matrix entries must be finite")
        failed = np.zeros(values.shape, bool) if self.failed is None else np.asarray(self.failed, bool)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        object.__setattr__(self, "col_ids", tuple(self.col_ids))
        object.__setattr__(self, "failed", failed)

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, path) -> None:
        """Write ``series_id,<kernel>,...`` rows with 17 significant digits."""
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["series_id", *self.col_ids])
            for sid, row in zip(self.row_ids, self.values):
                w.writerow([sid, *(f"{v:.17g}" for v in row)])

    @classmethod
    def from_csv(cls, path) -> "BicMatrix":
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][:1] != ["series_id"] or len(rows[0]) < 2:
            raise ParseError(f"{path}: expected header series_id,<kernel>,...", line=1)
        cols = rows[0][1:]
        ids, values = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(cols) + 1:
                raise ParseError(f"expected {len(cols) + 1} fields, got {len(row)}", line=lineno)
            try:
                values.append([float(v) for v in row[1:]])
            except ValueError:
                raise ParseError(f"non-numeric BIC value in {row!r}", line=lineno) from None
            ids.append(row[0])
        return cls(np.array(values).reshape(len(ids), len(cols)), ids, cols)


def cell_rng(seed: int, j: int, k: int) -> np.random.Generator:
    """Generator for cell (j, k); independent of scheduling and worker count."""
    return np.random.default_rng(np.random.SeedSequence([seed, j, k]))


def _fit_row(args):
    j, series, kernels, config = args
    out = []
    with threadpool_limits(limits=1):
        for k, e in enumerate(kernels):
            start = time.perf_counter()
            try:
                m = fit(e, series, config, rng=cell_rng(config.seed, j, k))
                cell = {"bic": m.bic, "lml": m.lml, "restarts_used": m.restarts_used, "failed": False}
            except FitError as exc:
                cell = {"bic": None, "lml": None, "restarts_used": 0, "failed": True, "error": str(exc)}
            cell["wall_time"] = time.perf_counter() - start
            out.append(cell)
    return out


def _limit_threads():
    threadpool_limits(limits=1)


def evaluate_all(dataset, kernels, config: FitConfig = FitConfig(), workers: int = 1) -> BicMatrix:
    """Fit every kernel to every series and collect the BICs.

    Failed cells get the worst finite BIC of their row plus 10 and are
    flagged in ``failed`` and in the attached report.  More than half of
    the cells failing raises :class:`SweepError`.
    """
    kernels = list(kernels)
    if not kernels:
        raise ValidationError("evaluate_all needs at least one kernel")
    if len(dataset.series) == 0:
        raise ValidationError("evaluate_all needs at least one series")
    names = [canonicalize(e) for e in kernels]
    tasks = [(j, s, kernels, config) for j, s in enumerate(dataset.series)]

    start = time.perf_counter()
    if workers <= 1:
        rows = [_fit_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_limit_threads) as pool:
            rows = list(pool.map(_fit_row, tasks))
    total = time.perf_counter() - start

    J, K = len(rows), len(kernels)
    values = np.full((J, K), np.nan)
    failed = np.zeros((J, K), bool)
    for j, row in enumerate(rows):
        for k, cell in enumerate(row):
            if cell["failed"]:
                failed[j, k] = True
            else:
                values[j, k] = cell["bic"]

    n_failed = int(failed.sum())
    if n_failed > MAX_FAILED_FRACTION * J * K:
        raise SweepError(f"{n_failed} of {J * K} fits failed")
    if n_failed:
        log.warning("%d of %d fits failed; using sentinel values", n_failed, J * K)
        overall = np.nanmax(values)
        for j in range(J):
            row_worst = np.nanmax(values[j]) if np.isfinite(values[j]).any() else overall
            values[j, failed[j]] = row_worst + SENTINEL_MARGIN

    ids = dataset.ids
    report = {
        "n_series": J,
        "n_kernels": K,
        "fit_config": {
            "restarts": config.restarts,
            "max_iters": config.max_iters,
            "tol": config.tol,
            "seed": config.seed,
        },
        "workers": workers,
        "n_failed": n_failed,
        "total_wall_time": total,
        "cells": [
            dict(series_id=ids[j], kernel=names[k], **rows[j][k]) for j in range(J) for k in range(K)
        ],
    }
    return BicMatrix(values, ids, names, failed, report)
