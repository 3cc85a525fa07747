"""Command-line front end: dataset tooling, filter ranking,
cross-validation, selection runs, transfer-function benchmarking, and the
rank statistics.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, binarize
from .classifiers import ClassifierSpec, cross_validate
from .dataset import discretize, load_csv, make_synthetic, write_csv
from .errors import HerdSelectError
from .filters import mrmr_select
from .rngutil import mix64
from .select import (
    SelectorConfig,
    SUMMARY_COLUMNS,
    export_result,
    result_to_dict,
    run_selection,
)
from .stats import RankMatrix, friedman_statistic, posthoc_z


def _positive_int(value):
    iv = int(value)
    if iv <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {value}")
    return iv


def _default_threads():
    env = os.environ.get("HERDSELECT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (np.integer, np.floating)):
        return value.item()
    if callable(value):
        return None
    return str(value)


def _write_manifest(out_dir, command, args_doc, derived_seeds=None, extra=None):
    args_doc = {k: _jsonable(v) for k, v in args_doc.items() if k != "func"}
    doc = {
        "tool": "herdselect",
        "version": __version__,
        "command": command,
        "config": args_doc,
        "derived_seeds": derived_seeds or {},
    }
    if extra:
        doc.update(extra)
    _write_json(Path(out_dir) / "run-manifest.json", doc)


def _load_dataset(args):
    label = args.label_col
    if label is not None:
        try:
            label = int(label)
        except ValueError:
            pass
    return load_csv(args.data, label_col=label)


def _classifier_from_args(args):
    return ClassifierSpec(kind=args.classifier, k=args.knn_k, C=args.svm_c,
                          epochs=args.svm_epochs)


def _add_classifier_flags(p):
    p.add_argument("--classifier", choices=("knn", "gaussian_nb", "linear_svm"),
                   default="linear_svm")
    p.add_argument("--knn-k", type=_positive_int, default=5)
    p.add_argument("--svm-c", type=float, default=1.0)
    p.add_argument("--svm-epochs", type=_positive_int, default=200)


# -- subcommands -------------------------------------------------------------

def cmd_filter(args):
    d = _load_dataset(args)
    disc = discretize(d, method="mean_sigma", t=0.5)
    ranking = mrmr_select(disc, d.labels, args.top_m)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "ranking.csv"
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "gene_index", "gene_name", "score"])
        for rank, (idx, score) in enumerate(zip(ranking.order, ranking.scores), 1):
            writer.writerow([rank, idx, d.gene_names[idx], repr(score)])
    _write_manifest(out_dir, "filter", vars(args))
    print(f"wrote {out_path}")
    return 0


def cmd_cv(args):
    d = _load_dataset(args)
    spec = _classifier_from_args(args)
    mean, folds = cross_validate(d, spec, args.folds, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "dataset": str(args.data),
        "classifier": dataclasses.asdict(spec),
        "folds": args.folds,
        "seed": args.seed,
        "mean": dataclasses.asdict(mean),
        "per_fold": [dataclasses.asdict(r) for r in folds],
    }
    out_path = out_dir / "cv-report.json"
    _write_json(out_path, doc)
    _write_manifest(out_dir, "cv", vars(args))
    print(f"wrote {out_path}")
    return 0


def _selector_config(args):
    # JSON config file values fill in for flags left at their defaults;
    # explicitly passed flags always win.
    merged = dict(vars(args))
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        provided = set(a.lstrip("-").replace("-", "_").split("=")[0]
                       for a in sys.argv if a.startswith("--"))
        for key, value in file_cfg.items():
            k = key.replace("-", "_")
            if k in merged and k not in provided:
                merged[k] = value
    spec = ClassifierSpec(kind=merged["classifier"], k=merged["knn_k"],
                          C=merged["svm_c"], epochs=merged["svm_epochs"])
    cfg = SelectorConfig(
        alpha_w=merged["alpha"],
        tf=merged.get("tf", "x"),
        n_horses=merged["horses"],
        max_iter=merged["iters"],
        mrmr_top_m=merged["top_m"],
        classifier=spec,
        cv_folds=merged["folds"],
        repeats=merged["repeats"],
        seed=merged["seed"],
    )
    return cfg, merged


def _run_and_write_selection(d, cfg, out_dir, threads, dataset_name, plot):
    from .report import plot_convergence

    t0 = time.perf_counter()
    res = run_selection(d, cfg, threads=threads)
    elapsed = time.perf_counter() - t0
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # result.json is free of wall-clock fields so reruns are byte-identical
    _write_json(out_dir / "result.json",
                result_to_dict(res, include_timing=False))
    export_result(res, out_dir / "result-full.json", out_dir / "summary.csv",
                  dataset_name=dataset_name, tf=cfg.tf)
    if plot:
        traces = {f"repeat {i}": list(r.trace)
                  for i, r in enumerate(res.per_repeat)}
        plot_convergence(traces, out_dir / "convergence.png",
                         title=f"{dataset_name} ({cfg.tf})")
    return res, elapsed


def cmd_select(args):
    d = _load_dataset(args)
    cfg, merged = _selector_config(args)
    res, elapsed = _run_and_write_selection(
        d, cfg, args.out, args.threads, Path(args.data).stem, not args.no_plot)
    derived = {f"repeat{r}": mix64(cfg.seed, "repeat", r)
               for r in range(cfg.repeats)}
    _write_manifest(args.out, "select",
                    {k: v for k, v in merged.items() if k != "func"},
                    derived_seeds=derived,
                    extra={"wall_seconds": elapsed})
    print(f"best fitness {res.best_fitness:.6f} "
          f"accuracy {res.best_accuracy:.4f} "
          f"genes {res.best_mask.selected_count}")
    return 0


def cmd_tf_bench(args):
    from .report import plot_convergence, plot_tf_comparison

    d = _load_dataset(args)
    tags = [t.strip().lower() for t in args.tfs.split(",") if t.strip()]
    for t in tags:
        if t not in binarize.TF_TAGS:
            raise HerdSelectError(
                f"unknown transfer function {t!r}; valid: {', '.join(binarize.TF_TAGS)}")
    base_cfg, merged = _selector_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    mean_traces = {}
    derived = {}
    for tag in tags:
        tf_seed = mix64(base_cfg.seed, "tf", tag)
        derived[f"tf:{tag}"] = tf_seed
        cfg = dataclasses.replace(base_cfg, tf=tag, seed=tf_seed)
        res = run_selection(d, cfg, threads=args.threads)
        rows.append({"tf": tag, **res.summary})
        traces = [list(r.trace) for r in res.per_repeat]
        mean_traces[tag] = traces
        with open(out_dir / f"trace_{tag}.csv", "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration"] +
                            [f"repeat{i}" for i in range(len(traces))])
            for it in range(len(traces[0])):
                writer.writerow([it] + [repr(t[it]) for t in traces])

    with open(out_dir / "comparison.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["tf", "best_accuracy", "mean_accuracy", "worst_accuracy",
                  "std_accuracy", "mean_genes", "std_genes"]
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[h] if h == "tf" else repr(row[h])
                             for h in header])

    if not args.no_plot:
        plot_convergence(mean_traces, out_dir / "tf-convergence.png",
                         title="Transfer function convergence")
        plot_tf_comparison(rows, out_dir / "tf-comparison.png")
    _write_manifest(out_dir, "tf-bench",
                    {k: v for k, v in merged.items() if k != "func"},
                    derived_seeds=derived)
    print(f"wrote {out_dir / 'comparison.csv'}")
    return 0


def cmd_demo_data(args):
    d, truth = make_synthetic(args.samples, args.informative, args.noise,
                              args.classes, args.separation, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "data.csv"
    write_csv(d, csv_path)
    _write_json(out_dir / "ground-truth.json", {
        "informative_indices": [int(i) for i in truth.indices()],
        "mask_bits": [int(b) for b in truth.bits],
        "n_genes": d.n_genes,
        "n_samples": d.n_samples,
        "n_classes": d.n_classes,
        "separation": args.separation,
        "seed": args.seed,
    })
    _write_manifest(out_dir, "demo-data", vars(args))
    print(f"wrote {csv_path}")
    return 0


def _read_scores_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise HerdSelectError(f"{path}: need a header and at least one data row")
    header = rows[0]
    names = header[1:] if header and header[0].lower() in ("dataset", "") \
        else header
    offset = len(header) - len(names)
    data = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise HerdSelectError(
                f"{path}: row {i}: expected {len(header)} cells, got {len(row)}")
        vals = []
        for j, cell in enumerate(row[offset:], start=offset):
            try:
                vals.append(float(cell))
            except ValueError:
                raise HerdSelectError(
                    f"{path}: row {i}, column {j + 1}: non-numeric cell {cell!r}")
        data.append(vals)
    return names, np.array(data)  # datasets x algorithms


def cmd_stats(args):
    names, data = _read_scores_csv(args.scores)
    if args.pre_ranked:
        if data.shape[0] != 1:
            raise HerdSelectError("--pre-ranked expects a single row of ranks")
        avg_ranks = data[0]
        k = avg_ranks.size
        n = args.n_datasets
        if n is None:
            raise HerdSelectError("--pre-ranked requires --n-datasets")
    else:
        rm = RankMatrix.from_scores(data.T, higher_is_better=not args.lower_is_better)
        avg_ranks = rm.avg_ranks
        k, n = data.shape[1], data.shape[0]
    chi2, p = friedman_statistic(avg_ranks, k, n)
    table = posthoc_z(avg_ranks, k, n, names=names)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "stats.json"
    _write_json(out_path, {
        "k": k, "n": n,
        "algorithms": list(names),
        "avg_ranks": [float(r) for r in avg_ranks],
        "chi_square": chi2,
        "p_value": p,
        "posthoc": table,
    })
    _write_manifest(out_dir, "stats", {k2: v for k2, v in vars(args).items()
                                       if k2 != "func"})
    print(f"chi_square={chi2:.6f} p={p:.6g}")
    return 0


# -- parser -------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="herdselect",
        description="Gene selection via a binary horse-herd search with an "
                    "MRMR prefilter, plus evaluators and rank statistics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help="0 = auto (cpu count)")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("filter", help="MRMR gene ranking to CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default=None)
    p.add_argument("--top-m", type=_positive_int, default=50)
    common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("cv", help="cross-validated metric report")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default=None)
    _add_classifier_flags(p)
    p.add_argument("--folds", type=_positive_int, default=10)
    common(p)
    p.set_defaults(func=cmd_cv)

    def select_flags(p):
        p.add_argument("--data", required=True)
        p.add_argument("--label-col", default=None)
        p.add_argument("--top-m", type=_positive_int, default=50, dest="top_m")
        p.add_argument("--horses", type=_positive_int, default=35)
        p.add_argument("--iters", type=_positive_int, default=60)
        p.add_argument("--repeats", type=_positive_int, default=20)
        p.add_argument("--folds", type=_positive_int, default=10)
        p.add_argument("--alpha", type=float, default=0.99)
        _add_classifier_flags(p)
        p.add_argument("--config", default=None,
                       help="JSON file with the same keys; flags override")
        p.add_argument("--no-plot", action="store_true")
        common(p)

    p = sub.add_parser("select", help="run the hybrid gene selection")
    p.add_argument("--tf", choices=binarize.TF_TAGS, default="x")
    select_flags(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("tf-bench", help="compare transfer functions")
    p.add_argument("--tfs", default="s1,v1,x",
                   help="comma-separated transfer function tags")
    select_flags(p)
    p.set_defaults(func=cmd_tf_bench)

    p = sub.add_parser("demo-data", help="generate a synthetic dataset")
    p.add_argument("--samples", type=_positive_int, default=120)
    p.add_argument("--informative", type=_positive_int, default=8)
    p.add_argument("--noise", type=_positive_int, default=92)
    p.add_argument("--classes", type=_positive_int, default=2)
    p.add_argument("--separation", type=float, default=3.0)
    common(p)
    p.set_defaults(func=cmd_demo_data)

    p = sub.add_parser("stats", help="Friedman test and post-hoc comparisons")
    p.add_argument("--scores", required=True,
                   help="CSV: rows = datasets, columns = algorithms")
    p.add_argument("--pre-ranked", action="store_true",
                   help="input is a one-row CSV of average ranks")
    p.add_argument("--n-datasets", type=_positive_int, default=None)
    p.add_argument("--lower-is-better", action="store_true")
    common(p)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) == 0:
        args.threads = os.cpu_count() or 1
    try:
        return args.func(args)
    except HerdSelectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
