"""Benchmark and anomaly-detection experiments shared by scripts and tests."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .baselines import dtw_matrix, saxbop_matrix
from .clustering import hdbscan
from .evaluation import cluster_metrics
from .gp import FitConfig
from .grammar import BASE_NAMES, expand
from .pipeline import cluster_bic, hac_bic
from .series import Dataset, corrupt_dataset, generate_gait_like, generate_synthetic
from .sweep import evaluate_all


@dataclass(frozen=True)
class BenchmarkConfig:
    seed: int = 0
    n: int = 100
    restarts: int = 3
    max_iters: int = 200
    tol: float = 1e-6
    min_cluster_size: int = 3
    workers: int = 1
    n_kernels: int = None  # first k kernels of the sorted list; None for all 87
    n_series: int = None  # evenly spaced subset of the 60 series; None for all

    def fit_config(self) -> FitConfig:
        return FitConfig(self.restarts, self.max_iters, self.tol, self.seed)


def _subset(data: Dataset, count):
    if count is None or count >= len(data):
        return data
    idx = np.linspace(0, len(data) - 1, count).round().astype(int)
    return Dataset([data.series[i] for i in idx], [data.labels[i] for i in idx], dict(data.meta))


def run_benchmark(cfg: BenchmarkConfig = BenchmarkConfig()) -> dict:
    """Full synthetic benchmark: HRKL against DTW and SAX-BoP, all through HDBSCAN."""
    data = _subset(generate_synthetic(cfg.seed, cfg.n), cfg.n_series)
    kernels = expand(BASE_NAMES)
    if cfg.n_kernels is not None:
        kernels = kernels[: cfg.n_kernels]

    start = time.perf_counter()
    B = evaluate_all(data, kernels, cfg.fit_config(), cfg.workers)
    sweep_time = time.perf_counter() - start

    start = time.perf_counter()
    result = cluster_bic(B, cfg.min_cluster_size)
    cluster_time = time.perf_counter() - start

    scores = {"hrkl": cluster_metrics(data.labels, result.labels)}
    for name, matrix in (("dtw", dtw_matrix), ("saxbop", saxbop_matrix)):
        labels = hdbscan(matrix(data), cfg.min_cluster_size)
        scores[name] = cluster_metrics(data.labels, labels)

    fit_times = [cell["wall_time"] for cell in B.report["cells"]]
    return {
        "config": asdict(cfg),
        "data": data,
        "bic": B,
        "result": result,
        "scores": scores,
        "sweep_time": sweep_time,
        "cluster_time": cluster_time,
        "mean_fit_time": float(np.mean(fit_times)),
    }


@dataclass(frozen=True)
class AnomalyConfig:
    seed: int = 0
    count: int = 15
    n: int = 80
    n_corrupted: int = 3
    sections: int = 2
    frac: float = 0.15
    restarts: int = 3
    max_iters: int = 200
    tol: float = 1e-6
    metric: str = "euclidean"
    workers: int = 1


def run_anomaly(cfg: AnomalyConfig = AnomalyConfig()) -> dict:
    """Corrupt a few gait-like series and try to split them off with a 2-cluster HAC cut."""
    data = generate_gait_like(cfg.seed, cfg.count, cfg.n)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    chosen = sorted(rng.choice(cfg.count, size=cfg.n_corrupted, replace=False).tolist())
    corrupted = corrupt_dataset(data, [data.ids[i] for i in chosen], cfg.seed, cfg.sections, cfg.frac)
    fit_cfg = FitConfig(cfg.restarts, cfg.max_iters, cfg.tol, cfg.seed)
    B = evaluate_all(corrupted, expand(BASE_NAMES), fit_cfg, cfg.workers)
    result = hac_bic(B, 2, cfg.metric)
    return {
        "config": asdict(cfg),
        "data": corrupted,
        "corrupted": [data.ids[i] for i in chosen],
        "bic": B,
        "result": result,
        "score": cluster_metrics(corrupted.labels, result.labels),
    }
