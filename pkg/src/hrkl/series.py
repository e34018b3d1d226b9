"""Time-series containers, CSV ingestion and seeded data generators."""

from __future__ import annotations

import csv
import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ParseError, PlacementError, ValidationError

DEGENERATE_STD = 1e-12

CLASS_NAMES = ("sine", "line", "sine_trend", "noise", "step", "sinc")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeries:
    id: str
    x: np.ndarray
    y: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        x, y = _frozen(self.x), _frozen(self.y)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValidationError(f"series {self.id!r}: x and y must be 1-D of equal length")
        if len(x) < 2:
            raise ValidationError(f"series {self.id!r}: need at least 2 points, got {len(x)}")
        if np.any(np.diff(x) <= 0):
            raise ValidationError(f"series {self.id!r}: time coordinates must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class Dataset:
    series: tuple
    labels: Optional[tuple] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        ids = [s.id for s in self.series]
        if len(set(ids)) != len(ids):
            raise ValidationError("series ids must be unique")
        if self.labels is not None:
            labels = tuple(int(v) for v in self.labels)
            if len(labels) != len(self.series):
                raise ValidationError(
                    f"got {len(labels)} labels for {len(self.series)} series"
                )
            if any(v < 0 for v in labels):
                raise ValidationError("class labels must be non-negative")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.series)

    @property
    def ids(self):
        return [s.id for s in self.series]

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.series, labels, dict(self.meta))


def standardize_series(y) -> tuple:
    """Z-score with the population standard deviation.

    Returns ``(z, degenerate)``; a series whose std is below 1e-12 maps to
    all zeros with ``degenerate=True``.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 2:
        raise ValidationError("standardize_series needs at least 2 values")
    std = y.std()
    if std < DEGENERATE_STD:
        return np.zeros_like(y), True
    return (y - y.mean()) / std, False


def normalize_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return (t - t[0]) / (t[-1] - t[0])


def make_series(sid, t, y, standardize=True) -> TimeSeries:
    """Build a series with time mapped onto [0, 1] and (optionally) z-scored values."""
    t = np.asarray(t, dtype=float)
    if len(t) < 2:
        raise ValidationError(f"series {sid!r}: need at least 2 points, got {len(t)}")
    if np.any(np.diff(t) <= 0):
        raise ValidationError(f"series {sid!r}: timestamps must be strictly increasing")
    degenerate = False
    if standardize:
        y, degenerate = standardize_series(y)
    return TimeSeries(str(sid), normalize_time(t), y, degenerate)


def _number(text, lineno, what):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    if what == "timestamp":
        try:
            return float(_dt.date.fromisoformat(text).toordinal())
        except ValueError:
            pass
    raise ParseError(f"cannot parse {what} {text!r}", line=lineno)


def detect_layout(header) -> str:
    cols = [c.strip().lower() for c in header]
    if cols[:3] == ["series_id", "t", "value"] and len(cols) == 3:
        return "long"
    if cols and cols[0] == "t" and len(cols) >= 2:
        return "wide"
    raise ParseError(f"unrecognised header {header!r}", line=1)


def load_csv(path, layout: str = "auto", standardize: bool = True) -> Dataset:
    """Read a dataset in long (``series_id,t,value``) or wide (``t,id1,...``) layout.

    Time is mapped onto [0, 1] per series and values are standardized
    (pass ``standardize=False`` for data that already is, e.g. corrupted
    series whose zero runs must survive).  Series keep file order.
    ISO dates are accepted as timestamps.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = rows[0]
    if layout == "auto":
        layout = detect_layout(header)
    if layout not in ("long", "wide"):
        raise ValidationError(f"unknown layout {layout!r}")

    if layout == "long":
        if len(header) != 3:
            raise ParseError("long layout needs header series_id,t,value", line=1)
        groups = {}
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            sid = row[0].strip()
            t = _number(row[1], lineno, "timestamp")
            v = _number(row[2], lineno, "value")
            groups.setdefault(sid, ([], []))
            groups[sid][0].append(t)
            groups[sid][1].append(v)
        columns = [(sid, ts, vs) for sid, (ts, vs) in groups.items()]
    else:
        ids = [h.strip() for h in header[1:]]
        ts, values = [], [[] for _ in ids]
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            ts.append(_number(row[0], lineno, "timestamp"))
            for col, cell in zip(values, row[1:]):
                col.append(_number(cell, lineno, "value"))
        columns = [(sid, ts, vs) for sid, vs in zip(ids, values)]

    if not columns:
        raise ValidationError(f"{path}: no series found")
    series = [make_series(sid, ts, vs, standardize) for sid, ts, vs in columns]
    return Dataset(series, meta={"source": str(path), "layout": layout})


def load_labels(path, column: Optional[str] = None) -> dict:
    """Read a ``series_id,<label>`` CSV into a dict (``-1`` allowed)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ParseError(f"{path}: expected header series_id,<label>", line=1)
        idx = 1 if column is None else [h.strip() for h in header].index(column)
        out = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out[row[0].strip()] = int(row[idx])
            except (ValueError, IndexError):
                raise ParseError(f"bad label row {row!r}", line=lineno) from None
    return out


def write_long_csv(dataset: Dataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series_id", "t", "value"])
        for s in dataset.series:
            for t, v in zip(s.x, s.y):
                w.writerow([s.id, repr(float(t)), repr(float(v))])


def write_labels(ids, labels, path, column="label") -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series_id", column])
        for sid, lab in zip(ids, labels):
            w.writerow([sid, int(lab)])


def generate_synthetic(seed: int, n: int = 100, high_noise_sine: bool = True) -> Dataset:
    """Six-class benchmark of 60 standardized series (10 per class).

    Classes, in label order: noisy sines, noisy lines, sines on a linear
    trend, white noise, Heaviside steps, sinc bumps.  With
    ``high_noise_sine`` the fifth sine gets the maximum noise level.
    """
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, n)
    per_class = 10

    def sine():
        amp = rng.uniform(0.5, 2.0)
        freq = rng.uniform(2.0, 8.0)
        phase = rng.uniform(0.0, 2 * np.pi)
        return amp * np.sin(2 * np.pi * freq * x + phase)

    def line():
        return rng.uniform(-2.0, 2.0) * x + rng.uniform(-1.0, 1.0)

    series, labels = [], []
    for label, name in enumerate(CLASS_NAMES):
        for i in range(per_class):
            noise_std = rng.uniform(0.05, 0.5)
            if name == "sine":
                if high_noise_sine and i == 4:
                    noise_std = 0.5
                y = sine()
            elif name == "line":
                y = line()
            elif name == "sine_trend":
                y = sine() + line()
            elif name == "noise":
                y, noise_std = rng.normal(size=n), 0.0
            elif name == "step":
                loc = rng.uniform(0.2, 0.8)
                sign = rng.choice([-1.0, 1.0])
                y = sign * np.where(x >= loc, 1.0, 0.0)
                noise_std *= 0.2
            else:
                center = rng.uniform(0.3, 0.7)
                width = rng.uniform(0.05, 0.2)
                y = np.sinc((x - center) / width)
                noise_std *= 0.2
            y = y + noise_std * rng.normal(size=n)
            series.append(make_series(f"{name}_{i}", x, y))
            labels.append(label)
    return Dataset(series, labels, meta={"generator": "synthetic", "seed": seed, "n": n})


def generate_gait_like(seed: int, count: int = 15, n: int = 200) -> Dataset:
    """Stride-interval stand-ins: a smoothed random walk plus white noise.

    All series are standardized and labelled 0 (uncorrupted).
    """
    if count < 1 or n < 10:
        raise ValidationError("generate_gait_like needs count >= 1 and n >= 10")
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, n)
    window = 10
    kernel = np.ones(window) / window
    series = []
    for i in range(count):
        walk = np.cumsum(rng.normal(size=n + window - 1))
        drift = np.convolve(walk, kernel, mode="valid")
        drift, _ = standardize_series(drift)
        y = 0.5 * drift + rng.normal(size=n)
        series.append(make_series(f"gait_{i:02d}", x, y))
    return Dataset(series, [0] * count, meta={"generator": "gait", "seed": seed, "n": n})


def section_length(n: int, frac: float) -> int:
    # round half up, unlike Python's round()
    return int(np.floor(frac * n + 0.5))


def corrupt(series: TimeSeries, seed: int, sections: int = 2, frac: float = 0.15) -> TimeSeries:
    """Zero out ``sections`` disjoint runs of ``round(frac*n)`` points.

    Runs are separated by at least one untouched point so each stays a
    distinct run.  The series is not re-standardized.
    """
    if sections < 1:
        raise ValidationError("sections must be >= 1")
    if frac < 0 or sections * frac > 0.8 + 1e-12:
        raise ValidationError(f"sections*frac must be in [0, 0.8], got {sections * frac}")
    n = series.n
    length = section_length(n, frac)
    if length == 0:
        return series
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        starts = np.sort(rng.integers(0, n - length + 1, size=sections))
        if np.all(np.diff(starts) > length):
            break
    else:
        raise PlacementError(
            f"could not place {sections} runs of {length} in a series of length {n}"
        )
    y = np.array(series.y)
    for s in starts:
        y[s : s + length] = 0.0
    return TimeSeries(series.id, series.x, y, series.degenerate)


def corrupt_dataset(dataset: Dataset, ids: Sequence[str], seed: int, sections=2, frac=0.15) -> Dataset:
    """Corrupt the named series; labels become 1 for corrupted, 0 otherwise.

    Each corrupted series gets its own seed derived from ``seed`` and its
    position, so results do not depend on the order of ``ids``.
    """
    wanted = set(ids)
    unknown = wanted - set(dataset.ids)
    if unknown:
        raise ValidationError(f"unknown series ids: {sorted(unknown)}")
    out, labels = [], []
    for j, s in enumerate(dataset.series):
        if s.id in wanted:
            sub = int(np.random.SeedSequence([seed, j]).generate_state(1)[0])
            out.append(corrupt(s, sub, sections, frac))
            labels.append(1)
        else:
            out.append(s)
            labels.append(0)
    meta = dict(dataset.meta, corrupted=sorted(wanted), corrupt_seed=seed)
    return Dataset(out, labels, meta)
