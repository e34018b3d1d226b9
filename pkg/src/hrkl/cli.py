"""Command-line front end.

Subcommands: synth, analyze, cluster, describe, baseline, eval, corrupt.
Matrices are written as CSV, reports as JSON; every report carries the
tool version and the run configuration.

Exit codes: 0 success, 2 usage, 3 validation, 4 numerical failure, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import SaxConfig, dtw_matrix, saxbop_matrix
from .clustering import (
    cut_dendrogram,
    describe_clusters,
    hac_single_linkage,
    hdbscan,
    select_shared_kernel,
    write_dendrogram_json,
    write_labels_csv,
)
from .embedding import cosine_distances, read_distance_csv, standardize_rows
from .errors import NumericError, ValidationError
from .evaluation import cluster_metrics
from .gp import FitConfig
from .grammar import BASE_NAMES, describe, expand, parse, read_grammar
from .series import (
    corrupt_dataset,
    generate_gait_like,
    generate_synthetic,
    load_csv,
    load_labels,
    write_labels,
    write_long_csv,
)
from .sweep import BicMatrix, evaluate_all

EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 2, 3, 4, 5

log = logging.getLogger("hrkl")


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    restarts: int = 3
    max_iters: int = 200
    tol: float = 1e-6
    min_cluster_size: int = 3
    hac_metric: str = "euclidean"
    n_clusters: int = None
    workers: int = 1
    paths: dict = field(default_factory=dict)


def _report(config: RunConfig, **body) -> dict:
    return {"tool": "hrkl", "version": __version__, "config": asdict(config), **body}


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args) -> int:
    cfg = RunConfig("synth", seed=args.seed, paths={"out": args.out})
    if args.kind == "benchmark":
        data = generate_synthetic(args.seed, n=args.n or 100, high_noise_sine=not args.no_high_noise_sine)
    else:
        data = generate_gait_like(args.seed, args.count, args.n or 200)
    out = _outdir(args.out)
    write_long_csv(data, out / "series.csv")
    write_labels(data.ids, data.labels, out / "labels.csv")
    _write_json(out / "synth_report.json", _report(cfg, kind=args.kind, n_series=len(data)))
    print(f"wrote {len(data)} series to {out / 'series.csv'}")
    return 0


def cmd_analyze(args) -> int:
    cfg = RunConfig(
        "analyze",
        seed=args.seed,
        restarts=args.restarts,
        max_iters=args.max_iters,
        tol=args.tol,
        workers=args.workers,
        paths={"data": args.data, "grammar": args.grammar, "out": args.out},
    )
    data = load_csv(args.data, args.layout, standardize=not args.no_standardize)
    kernels = read_grammar(args.grammar) if args.grammar else expand(BASE_NAMES)
    fit_cfg = FitConfig(args.restarts, args.max_iters, args.tol, args.seed)
    B = evaluate_all(data, kernels, fit_cfg, workers=args.workers)
    out = _outdir(args.out)
    B.to_csv(out / "bic.csv")
    _write_json(out / "fit_report.json", _report(cfg, **B.report))
    print(f"wrote {B.shape[0]}x{B.shape[1]} BIC matrix to {out / 'bic.csv'}")
    return 0


def cmd_cluster(args) -> int:
    cfg = RunConfig(
        "cluster",
        min_cluster_size=args.min_cluster_size,
        hac_metric=args.metric,
        n_clusters=args.clusters,
        paths={"bic": args.bic, "distances": args.distances, "out": args.out},
    )
    if (args.bic is None) == (args.distances is None):
        raise ValidationError("give exactly one of --bic or --distances")
    if args.method == "hac" and args.clusters is None:
        raise ValidationError("--clusters is required with --method hac")

    if args.bic:
        B = BicMatrix.from_csv(args.bic)
        ids = B.row_ids
        emb = standardize_rows(B)
        P = cosine_distances(emb)
        hac_input = emb
        metric = args.metric
    else:
        P = read_distance_csv(args.distances)
        ids = P.ids
        hac_input = P
        metric = "precomputed"

    out = _outdir(args.out)
    extra = {}
    if args.method == "hdbscan":
        labels = hdbscan(P, args.min_cluster_size)
    else:
        tree = hac_single_linkage(hac_input, metric)
        labels = cut_dendrogram(tree, args.clusters)
        write_dendrogram_json(tree, out / "dendrogram.json")
        (out / "dendrogram.dot").write_text(tree.to_dot(list(ids)), encoding="utf-8")
        extra["dendrogram"] = "dendrogram.json"
    write_labels_csv(ids, labels, out / "labels.csv")
    _write_json(
        out / "cluster_report.json",
        _report(cfg, method=args.method, n_clusters=labels.n_clusters, n_outliers=labels.n_outliers, **extra),
    )
    print(f"{labels.n_clusters} clusters, {labels.n_outliers} outliers")
    return 0


def cmd_describe(args) -> int:
    cfg = RunConfig("describe", paths={"bic": args.bic, "labels": args.labels, "out": args.out})
    B = BicMatrix.from_csv(args.bic)
    mapping = load_labels(args.labels)
    missing = [sid for sid in B.row_ids if sid not in mapping]
    if missing:
        raise ValidationError(f"labels missing for series {missing[:5]}")
    labels = np.array([mapping[sid] for sid in B.row_ids])
    shared = select_shared_kernel(B)
    report = _report(
        cfg,
        shared_kernel={"kernel": shared, "description": describe(parse(shared))},
        clusters=describe_clusters(B, labels),
    )
    _write_json(args.out, report)
    for entry in report["clusters"]:
        print(f"cluster {entry['cluster']} ({entry['size']}): {entry['kernel']}: "
              + "; ".join(entry["description"]))
    return 0


def cmd_baseline(args) -> int:
    cfg = RunConfig("baseline", paths={"data": args.data, "out": args.out})
    data = load_csv(args.data, args.layout)
    if args.method == "dtw":
        P = dtw_matrix(data)
        settings = {}
    else:
        sax = SaxConfig(args.window, args.word_length, args.alphabet, not args.no_numerosity_reduction)
        P = saxbop_matrix(data, sax)
        settings = asdict(sax.resolved(data.series[0].n))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    P.to_csv(out)
    _write_json(out.with_suffix(".json"), _report(cfg, method=args.method, settings=settings))
    print(f"wrote {len(P.ids)}x{len(P.ids)} {args.method} distances to {out}")
    return 0


def cmd_eval(args) -> int:
    cfg = RunConfig("eval", paths={"pred": args.pred, "truth": args.truth})
    pred = load_labels(args.pred)
    truth = load_labels(args.truth)
    if set(pred) != set(truth):
        raise ValidationError(
            f"prediction covers {len(pred)} series but truth covers {len(truth)} (ids differ)"
        )
    ids = list(truth)
    report = cluster_metrics([truth[i] for i in ids], [pred[i] for i in ids])
    body = _report(cfg, **report.to_dict())
    text = json.dumps(body, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_corrupt(args) -> int:
    cfg = RunConfig("corrupt", seed=args.seed, paths={"data": args.data, "out": args.out})
    data = load_csv(args.data, args.layout)
    ids = [i.strip() for i in args.ids.split(",") if i.strip()]
    if not ids:
        raise ValidationError("--ids must name at least one series")
    out_data = corrupt_dataset(data, ids, args.seed, args.sections, args.frac)
    out = _outdir(args.out)
    write_long_csv(out_data, out / "series.csv")
    write_labels(out_data.ids, out_data.labels, out / "labels.csv")
    _write_json(
        out / "corrupt_report.json",
        _report(cfg, corrupted=ids, sections=args.sections, frac=args.frac,
                note="values are already standardized; analyze with --no-standardize"),
    )
    print(f"corrupted {len(ids)} of {len(out_data)} series")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hrkl", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hrkl {__version__}")
    p.add_argument("--verbose", "-v", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a seeded dataset")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--kind", choices=["benchmark", "gait"], default="benchmark")
    s.add_argument("--count", type=int, default=15, help="series count (gait only)")
    s.add_argument("--n", type=int, default=None, help="series length")
    s.add_argument("--no-high-noise-sine", action="store_true")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("analyze", help="fit every kernel to every series; write the BIC matrix")
    s.add_argument("--data", required=True)
    s.add_argument("--layout", choices=["auto", "long", "wide"], default="auto")
    s.add_argument("--no-standardize", action="store_true")
    s.add_argument("--grammar", default=None, help="grammar file; default is the 87-kernel list")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=3)
    s.add_argument("--max-iters", type=int, default=200)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("cluster", help="cluster a BIC matrix or a distance matrix")
    s.add_argument("--bic", default=None)
    s.add_argument("--distances", default=None)
    s.add_argument("--method", choices=["hdbscan", "hac"], default="hdbscan")
    s.add_argument("--min-cluster-size", type=int, default=3)
    s.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean")
    s.add_argument("--clusters", type=int, default=None, help="cut the HAC tree into this many")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("describe", help="pick and describe a kernel per cluster")
    s.add_argument("--bic", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_describe)

    s = sub.add_parser("baseline", help="DTW or SAX bag-of-patterns distance matrix")
    s.add_argument("--data", required=True)
    s.add_argument("--layout", choices=["auto", "long", "wide"], default="auto")
    s.add_argument("--method", choices=["dtw", "saxbop"], required=True)
    s.add_argument("--window", type=int, default=None)
    s.add_argument("--word-length", type=int, default=8)
    s.add_argument("--alphabet", type=int, default=4)
    s.add_argument("--no-numerosity-reduction", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_baseline)

    s = sub.add_parser("eval", help="homogeneity, completeness and V-measure")
    s.add_argument("--pred", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("corrupt", help="zero out sections of selected series")
    s.add_argument("--data", required=True)
    s.add_argument("--layout", choices=["auto", "long", "wide"], default="auto")
    s.add_argument("--ids", required=True, help="comma-separated series ids")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sections", type=int, default=2)
    s.add_argument("--frac", type=float, default=0.15)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_corrupt)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"hrkl {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"hrkl {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"hrkl {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
