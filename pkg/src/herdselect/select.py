"""Hybrid gene selection: MRMR prefilter, binary herd search over gene
masks, and the weighted accuracy-vs-subset-size objective.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import binarize, hoa
from .classifiers import (
    ClassifierSpec,
    _svm_core,
    confusion,
    fit_predict,
    svm_epoch_orders,
)
from .dataset import Dataset, FoldPlan, GeneMask, discretize, stratified_k_fold, subset
from .errors import BadM
from .filters import mrmr_select
from .rngutil import mix64


@dataclass(frozen=True)
class SelectorConfig:
    alpha_w: float = 0.99
    tf: str = "x"
    n_horses: int = 35
    max_iter: int = 60
    mrmr_top_m: int = 50
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    cv_folds: int = 10
    repeats: int = 20
    seed: int = 0
    coeffs: hoa.BehaviorCoeffs = field(default_factory=hoa.BehaviorCoeffs)

    def __post_init__(self):
        if not 0 <= self.alpha_w <= 1:
            raise ValueError("alpha_w must be in [0, 1]")
        if self.tf not in binarize.TF_TAGS:
            raise ValueError(f"unknown transfer function {self.tf!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.n_horses < 4:
            raise ValueError("need at least 4 horses")

    @property
    def beta_w(self) -> float:
        return 1.0 - self.alpha_w


@dataclass(frozen=True)
class RepeatResult:
    accuracy: float
    n_selected: int
    runtime_seconds: float
    best_fitness: float
    best_bits: tuple
    trace: tuple          # incumbent fitness per iteration (index 0 = init)
    repairs: int          # empty-mask repairs encountered


@dataclass(frozen=True)
class SelectionResult:
    best_mask: GeneMask          # over the MRMR-filtered gene set
    best_gene_indices: tuple     # original-dataset column indices
    best_fitness: float
    best_accuracy: float
    per_repeat: tuple            # RepeatResult, one per repeat
    summary: dict
    filtered_columns: tuple      # original indices of the filtered set
    mrmr_order: tuple            # filtered set in MRMR selection order


def objective_value(acc: float, n_selected: int, n_total: int,
                    alpha_w: float) -> float:
    """Weighted objective: alpha*accuracy + (1-alpha)*|N-S|/N, maximized."""
    beta_w = 1.0 - alpha_w
    return alpha_w * acc + beta_w * abs(n_total - n_selected) / n_total


def _cv_accuracy(d: Dataset, spec: ClassifierSpec, plan: FoldPlan,
                 seed: int) -> float:
    """Mean fold accuracy; lighter than the full metric suite."""
    accs = []
    for fold_idx, (train_idx, test_idx) in enumerate(plan.folds):
        train = _take(d, train_idx)
        test = _take(d, test_idx)
        preds, _ = fit_predict(spec, train, test,
                               seed=mix64(seed, "fold", fold_idx))
        accs.append(float(np.mean(preds == test.labels)))
    return float(np.mean(accs))


def _take(d: Dataset, idx) -> Dataset:
    return Dataset(values=d.values[idx], labels=d.labels[idx],
                   gene_names=d.gene_names, class_names=d.class_names,
                   name=d.name)


class _FitnessCache:
    """Memoized mask fitness for one repeat (fixed folds, fixed seeds)."""

    def __init__(self, filtered: Dataset, cfg: SelectorConfig,
                 plan: FoldPlan, top1_position: int, svm_seed: int):
        self.filtered = filtered
        self.cfg = cfg
        self.plan = plan
        self.top1_position = top1_position
        self.svm_seed = svm_seed
        self.table = {}
        self.repairs = 0
        # the SVM revisits the same folds for every mask, so the row slices
        # and per-epoch sample orders are computed once up front
        self._svm_folds = None
        if cfg.classifier.kind == "linear_svm":
            self._svm_folds = []
            for fold_idx, (train_idx, test_idx) in enumerate(plan.folds):
                order = svm_epoch_orders(cfg.classifier.epochs,
                                         len(train_idx),
                                         mix64(svm_seed, "fold", fold_idx))
                self._svm_folds.append(
                    (filtered.values[train_idx], filtered.labels[train_idx],
                     filtered.values[test_idx], filtered.labels[test_idx],
                     order))

    def __call__(self, mask: GeneMask) -> float:
        return self.evaluate(mask)[0]

    def evaluate(self, mask: GeneMask):
        bits = mask.bits
        if mask.selected_count == 0:
            self.repairs += 1
            bits = np.zeros(len(mask), dtype=bool)
            bits[self.top1_position] = True
        key = bits.tobytes()
        hit = self.table.get(key)
        if hit is not None:
            return hit
        eval_mask = GeneMask(bits)
        if self._svm_folds is not None:
            acc = self._svm_accuracy(eval_mask)
        else:
            acc = _cv_accuracy(subset(self.filtered, eval_mask),
                               self.cfg.classifier, self.plan, self.svm_seed)
        fit = objective_value(acc, eval_mask.selected_count,
                              self.filtered.n_genes, self.cfg.alpha_w)
        self.table[key] = (fit, acc)
        return fit, acc

    def _svm_accuracy(self, mask: GeneMask) -> float:
        cols = mask.indices()
        spec = self.cfg.classifier
        n_classes = self.filtered.n_classes
        accs = []
        for train_v, train_y, test_v, test_y, order in self._svm_folds:
            preds, _ = _svm_core(spec, train_v[:, cols], train_y,
                                 test_v[:, cols], n_classes, order)
            accs.append(float(np.mean(preds == test_y)))
        return float(np.mean(accs))


def fitness(mask: GeneMask, filtered: Dataset, cfg: SelectorConfig) -> float:
    """Objective value of a mask over the filtered gene set.

    An empty mask is repaired by activating the first filtered gene.  The
    fold plan derives from cfg.seed, matching repeat 0 of run_selection.
    """
    plan = stratified_k_fold(filtered, cfg.cv_folds, mix64(cfg.seed, "repeat", 0))
    cache = _FitnessCache(filtered, cfg, plan, top1_position=0,
                          svm_seed=mix64(cfg.seed, "repeat", 0, "svm"))
    return cache(mask)


def _run_repeat(filtered: Dataset, cfg: SelectorConfig, repeat: int,
                top1_position: int) -> RepeatResult:
    t0 = time.perf_counter()
    m = filtered.n_genes
    fold_seed = mix64(cfg.seed, "repeat", repeat)
    plan = stratified_k_fold(filtered, cfg.cv_folds, fold_seed)
    cache = _FitnessCache(filtered, cfg, plan, top1_position,
                          svm_seed=mix64(cfg.seed, "repeat", repeat, "svm"))

    rng_init = np.random.default_rng((cfg.seed, repeat))
    masks = [GeneMask(rng_init.random(m) < 0.5) for _ in range(cfg.n_horses)]
    fits = np.array([cache(b) for b in masks])

    horse_best = list(masks)
    horse_best_fit = fits.copy()
    g = int(np.argmax(fits))
    global_best, global_best_fit = masks[g], float(fits[g])
    trace = [global_best_fit]

    for iteration in range(1, cfg.max_iter + 1):
        order = np.argsort(-fits, kind="stable")
        ranks = np.empty(cfg.n_horses, dtype=np.int64)
        ranks[order] = np.arange(cfg.n_horses)
        classes = hoa.assign_age_classes(ranks, cfg.n_horses)

        positions = np.array([b.bits for b in masks], dtype=np.float64)
        mean_pos, best_mean, worst_mean = hoa.group_means(
            positions, -fits, cfg.coeffs.p_frac, cfg.coeffs.q_frac)
        coeff_values = cfg.coeffs.at_iteration(iteration)
        incumbent = global_best.bits.astype(np.float64)

        new_masks = []
        for i in range(cfg.n_horses):
            rng = np.random.default_rng((cfg.seed, repeat, iteration, i))
            v = hoa.horse_velocity(positions[i], classes[i], coeff_values,
                                   incumbent, mean_pos, best_mean,
                                   worst_mean, rng, cfg.coeffs)
            if cfg.tf == "x":
                outcome = binarize.x_shaped_update(masks[i], v, cache, rng)
                new_masks.append(outcome.new_bits)
            elif cfg.tf in binarize.S_FAMILY:
                new_masks.append(binarize.binarize_s(masks[i], v, cfg.tf, rng))
            else:
                new_masks.append(binarize.binarize_v(masks[i], v, cfg.tf, rng))

        masks = new_masks
        fits = np.array([cache(b) for b in masks])
        for i in range(cfg.n_horses):
            if fits[i] > horse_best_fit[i]:
                horse_best_fit[i] = fits[i]
                horse_best[i] = masks[i]
        g = int(np.argmax(horse_best_fit))
        if horse_best_fit[g] > global_best_fit:
            global_best_fit = float(horse_best_fit[g])
            global_best = horse_best[g]
        trace.append(global_best_fit)

    best_fit, best_acc = cache.evaluate(global_best)
    # report the repaired form when the incumbent is the empty mask
    if global_best.selected_count == 0:
        global_best = GeneMask.from_indices([top1_position], m)
    return RepeatResult(
        accuracy=best_acc,
        n_selected=global_best.selected_count,
        runtime_seconds=time.perf_counter() - t0,
        best_fitness=best_fit,
        best_bits=tuple(int(b) for b in global_best.bits),
        trace=tuple(trace),
        repairs=cache.repairs,
    )


def run_selection(d: Dataset, cfg: SelectorConfig,
                  threads: int = 1) -> SelectionResult:
    """MRMR prefilter followed by binary herd search, repeated.

    Deterministic given cfg.seed; repeats run on independent derived seeds
    so the thread count never changes any numeric output.
    """
    if cfg.mrmr_top_m > d.n_genes:
        raise BadM(f"mrmr_top_m={cfg.mrmr_top_m} exceeds {d.n_genes} genes")
    disc = discretize(d, method="mean_sigma", t=0.5)
    ranking = mrmr_select(disc, d.labels, cfg.mrmr_top_m)
    filtered_cols = tuple(sorted(ranking.order))
    filtered = subset(d, GeneMask.from_indices(filtered_cols, d.n_genes))
    top1_position = filtered_cols.index(ranking.order[0])

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_repeat = list(pool.map(
                lambda r: _run_repeat(filtered, cfg, r, top1_position),
                range(cfg.repeats)))
    else:
        per_repeat = [_run_repeat(filtered, cfg, r, top1_position)
                      for r in range(cfg.repeats)]

    best_idx = int(np.argmax([r.best_fitness for r in per_repeat]))
    best = per_repeat[best_idx]
    best_mask = GeneMask(np.array(best.best_bits, dtype=bool))
    gene_indices = tuple(filtered_cols[j] for j in best_mask.indices())

    accs = np.array([r.accuracy for r in per_repeat])
    sizes = np.array([r.n_selected for r in per_repeat], dtype=np.float64)
    summary = {
        "best_accuracy": float(accs.max()),
        "mean_accuracy": float(accs.mean()),
        "worst_accuracy": float(accs.min()),
        "std_accuracy": float(accs.std(ddof=1)) if len(accs) > 1 else 0.0,
        "mean_genes": float(sizes.mean()),
        "std_genes": float(sizes.std(ddof=1)) if len(sizes) > 1 else 0.0,
    }
    return SelectionResult(
        best_mask=best_mask,
        best_gene_indices=gene_indices,
        best_fitness=best.best_fitness,
        best_accuracy=best.accuracy,
        per_repeat=tuple(per_repeat),
        summary=summary,
        filtered_columns=filtered_cols,
        mrmr_order=tuple(ranking.order),
    )


# -- serialization -----------------------------------------------------------

SUMMARY_COLUMNS = ("dataset", "tf", "best_accuracy", "mean_accuracy",
                   "worst_accuracy", "std_accuracy", "mean_genes",
                   "std_genes", "total_runtime_seconds")


def result_to_dict(res: SelectionResult, include_timing: bool = True) -> dict:
    out = {
        "best_mask_bits": [int(b) for b in res.best_mask.bits],
        "best_gene_indices": list(res.best_gene_indices),
        "best_fitness": res.best_fitness,
        "best_accuracy": res.best_accuracy,
        "summary": dict(res.summary),
        "filtered_columns": list(res.filtered_columns),
        "mrmr_order": list(res.mrmr_order),
        "per_repeat": [],
    }
    for r in res.per_repeat:
        entry = asdict(r)
        entry["best_bits"] = list(entry["best_bits"])
        entry["trace"] = list(entry["trace"])
        if not include_timing:
            del entry["runtime_seconds"]
        out["per_repeat"].append(entry)
    return out


def result_from_dict(doc: dict) -> SelectionResult:
    per_repeat = tuple(
        RepeatResult(
            accuracy=e["accuracy"],
            n_selected=e["n_selected"],
            runtime_seconds=e.get("runtime_seconds", 0.0),
            best_fitness=e["best_fitness"],
            best_bits=tuple(e["best_bits"]),
            trace=tuple(e["trace"]),
            repairs=e["repairs"],
        )
        for e in doc["per_repeat"]
    )
    return SelectionResult(
        best_mask=GeneMask(np.array(doc["best_mask_bits"], dtype=bool)),
        best_gene_indices=tuple(doc["best_gene_indices"]),
        best_fitness=doc["best_fitness"],
        best_accuracy=doc["best_accuracy"],
        per_repeat=per_repeat,
        summary=dict(doc["summary"]),
        filtered_columns=tuple(doc["filtered_columns"]),
        mrmr_order=tuple(doc["mrmr_order"]),
    )


def export_result(res: SelectionResult, json_path, csv_path=None,
                  dataset_name: str = "dataset", tf: str = "x",
                  include_timing: bool = True):
    """Write the full result as JSON plus a one-row CSV summary."""
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(result_to_dict(res, include_timing=include_timing), fh,
                  indent=2, sort_keys=True)
        fh.write("\n")
    if csv_path is not None:
        total_rt = sum(r.runtime_seconds for r in res.per_repeat)
        row = (dataset_name, tf,
               res.summary["best_accuracy"], res.summary["mean_accuracy"],
               res.summary["worst_accuracy"], res.summary["std_accuracy"],
               res.summary["mean_genes"], res.summary["std_genes"], total_rt)
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(",".join(SUMMARY_COLUMNS) + "\n")
            fh.write(",".join(str(v) for v in row) + "\n")


def load_result(json_path) -> SelectionResult:
    with open(json_path, encoding="utf-8") as fh:
        return result_from_dict(json.load(fh))
