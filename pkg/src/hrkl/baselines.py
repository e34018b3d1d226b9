"""Baseline representations: dynamic time warping and SAX bag-of-patterns."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from .embedding import DistanceMatrix
from .errors import ValidationError


def dtw_distance(a, b) -> float:
    """Exact DTW with squared-difference cell cost; returns the root of the path sum.

    Steps are down, right and diagonal.  The table is filled one
    anti-diagonal at a time so each diagonal is a single vector operation.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValidationError("dtw_distance needs non-empty inputs")
    cost = (a[:, None] - b[None, :]) ** 2
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for d in range(2, n + m + 1):
        i = np.arange(max(1, d - m), min(n, d - 1) + 1)
        j = d - i
        best = np.minimum(np.minimum(D[i - 1, j - 1], D[i - 1, j]), D[i, j - 1])
        D[i, j] = cost[i - 1, j - 1] + best
    return float(np.sqrt(D[n, m]))


def _pairwise(items, dist, ids) -> DistanceMatrix:
    J = len(items)
    P = np.zeros((J, J))
    for i in range(J):
        for j in range(i + 1, J):
            P[i, j] = P[j, i] = dist(items[i], items[j])
    return DistanceMatrix(P, tuple(ids), "precomputed")


def dtw_matrix(dataset) -> DistanceMatrix:
    ys = [s.y for s in dataset.series]
    out = _pairwise(ys, dtw_distance, dataset.ids)
    return DistanceMatrix(out.P, out.ids, "dtw")


@dataclass(frozen=True)
class SaxConfig:
    window: Optional[int] = None  # None: a quarter of the series length
    word_length: int = 8
    alphabet: int = 4
    numerosity_reduction: bool = True
    znorm_threshold: float = 0.01

    def __post_init__(self):
        if not 2 <= self.alphabet <= 10:
            raise ValidationError("alphabet must be between 2 and 10")
        if self.word_length < 1:
            raise ValidationError("word_length must be positive")
        if self.window is not None and self.word_length > self.window:
            raise ValidationError("word_length cannot exceed window")

    def resolved(self, n: int) -> "SaxConfig":
        if self.window is not None:
            return self
        return SaxConfig(max(n // 4, self.word_length), self.word_length, self.alphabet,
                         self.numerosity_reduction, self.znorm_threshold)


def breakpoints(alphabet: int) -> np.ndarray:
    """Equiprobable cut points of the standard normal."""
    return norm.ppf(np.arange(1, alphabet) / alphabet)


def paa(values, segments: int) -> np.ndarray:
    """Piecewise aggregate approximation; handles lengths not divisible by ``segments``."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n % segments == 0:
        return values.reshape(segments, -1).mean(axis=1)
    return np.repeat(values, segments).reshape(segments, n).mean(axis=1)


def sax_word(segment, cfg: SaxConfig) -> str:
    segment = np.asarray(segment, dtype=float)
    if cfg.window is not None and len(segment) != cfg.window:
        raise ValidationError(f"segment length {len(segment)} != window {cfg.window}")
    std = segment.std()
    if std < cfg.znorm_threshold:
        z = np.zeros_like(segment)
    else:
        z = (segment - segment.mean()) / std
    symbols = np.searchsorted(breakpoints(cfg.alphabet), paa(z, cfg.word_length), side="right")
    return "".join(chr(ord("a") + int(s)) for s in symbols)


def sax_bop_histogram(y, cfg: SaxConfig = SaxConfig()) -> Counter:
    """Counts of SAX words over all stride-1 windows."""
    y = np.asarray(getattr(y, "y", y), dtype=float)
    cfg = cfg.resolved(len(y))
    if len(y) < cfg.window:
        raise ValidationError(f"series of length {len(y)} is shorter than window {cfg.window}")
    counts = Counter()
    previous = None
    for start in range(len(y) - cfg.window + 1):
        word = sax_word(y[start : start + cfg.window], cfg)
        if cfg.numerosity_reduction and word == previous:
            continue
        counts[word] += 1
        previous = word
    return counts


def bop_distance(h1, h2) -> float:
    keys = set(h1) | set(h2)
    return float(np.sqrt(sum((h1.get(k, 0) - h2.get(k, 0)) ** 2 for k in keys)))


def saxbop_matrix(dataset, cfg: SaxConfig = SaxConfig()) -> DistanceMatrix:
    hists = [sax_bop_histogram(s.y, cfg) for s in dataset.series]
    out = _pairwise(hists, bop_distance, dataset.ids)
    return DistanceMatrix(out.P, out.ids, "saxbop")
