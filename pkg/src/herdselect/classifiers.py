"""Built-in evaluators (KNN, Gaussian naive Bayes, linear SVM), the
confusion-matrix metric suite, and the stratified cross-validation harness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .dataset import Dataset, stratified_k_fold
from .errors import DimensionMismatch, LengthMismatch
from .rngutil import mix64

VAR_FLOOR = 1e-9


@dataclass(frozen=True)
class ClassifierSpec:
    """Which evaluator to run and its hyperparameters.

    kind is one of "knn", "gaussian_nb", "linear_svm".  standardize applies
    a train-fitted z-score inside the classifier (default on for the SVM).
    """

    kind: str = "linear_svm"
    k: int = 5
    C: float = 1.0
    epochs: int = 200
    standardize: bool = None

    def __post_init__(self):
        if self.kind not in ("knn", "gaussian_nb", "linear_svm"):
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.kind == "knn" and self.k < 1:
            raise ValueError("knn needs k >= 1")
        if self.kind == "linear_svm" and self.C <= 0:
            raise ValueError("linear_svm needs C > 0")
        if self.standardize is None:
            object.__setattr__(self, "standardize", self.kind == "linear_svm")


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[a][p]: samples of actual class a predicted as class p."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (counts < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    f_measure: float
    mcc: float
    auc: float
    undefined: tuple = ()


@njit(cache=True, nogil=True)
def _svm_sgd(X, y_signed, C, order):
    """One-vs-rest hinge-loss subgradient descent.

    Minimizes (C/2)|w|^2 + mean hinge per class with step size 1/(C*t);
    the bias is unregularized.  `order` holds one sample permutation per
    epoch.
    """
    n, d = X.shape
    k = y_signed.shape[0]
    W = np.zeros((k, d))
    b = np.zeros(k)
    t = 0
    n_epochs = order.shape[0]
    for ep in range(n_epochs):
        for ii in range(n):
            i = order[ep, ii]
            t += 1
            eta = 1.0 / (C * t)
            shrink = 1.0 - eta * C
            for c in range(k):
                margin = b[c]
                for j in range(d):
                    margin += W[c, j] * X[i, j]
                margin *= y_signed[c, i]
                for j in range(d):
                    W[c, j] *= shrink
                if margin < 1.0:
                    yc = y_signed[c, i]
                    for j in range(d):
                        W[c, j] += eta * yc * X[i, j]
                    b[c] += eta * yc
    return W, b


def _standardize_fit(X):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return mu, sd


def svm_epoch_orders(epochs: int, n_train: int, seed: int) -> np.ndarray:
    """The per-epoch sample permutations the SVM visits for a given seed.

    Exposed so callers that refit on the same fold many times can compute
    the orders once; fit_predict produces exactly these internally.
    """
    rng = np.random.default_rng(seed)
    order = np.empty((epochs, n_train), dtype=np.int64)
    for ep in range(epochs):
        order[ep] = rng.permutation(n_train)
    return order


def _svm_core(spec, Xtr, ytr, Xte, n_classes, order):
    if spec.standardize:
        mu, sd = _standardize_fit(Xtr)
        Xtr = (Xtr - mu) / sd
        Xte = (Xte - mu) / sd
    y_signed = np.where(ytr[None, :] == np.arange(n_classes)[:, None],
                        1.0, -1.0)
    W, b = _svm_sgd(np.ascontiguousarray(Xtr), y_signed, float(spec.C), order)
    scores = Xte @ W.T + b
    return np.argmax(scores, axis=1), scores


def _fit_predict_svm(spec, train, test, n_classes, seed):
    order = svm_epoch_orders(spec.epochs, train.values.shape[0], seed)
    return _svm_core(spec, train.values, train.labels, test.values,
                     n_classes, order)


def _fit_predict_knn(spec, train, test, n_classes):
    Xtr, Xte = train.values, test.values
    if spec.standardize:
        mu, sd = _standardize_fit(Xtr)
        Xtr = (Xtr - mu) / sd
        Xte = (Xte - mu) / sd
    d2 = ((Xte[:, None, :] - Xtr[None, :, :]) ** 2).sum(axis=2)
    k = min(spec.k, Xtr.shape[0])
    # stable sort: equal distances resolve to the lower train index
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
    votes = np.zeros((Xte.shape[0], n_classes))
    for c in range(n_classes):
        votes[:, c] = (train.labels[nearest] == c).sum(axis=1)
    preds = np.argmax(votes, axis=1)  # vote ties: lower class index
    return preds, votes / k


def _fit_predict_gnb(spec, train, test, n_classes):
    Xtr, Xte = train.values, test.values
    if spec.standardize:
        mu, sd = _standardize_fit(Xtr)
        Xtr = (Xtr - mu) / sd
        Xte = (Xte - mu) / sd
    n = Xtr.shape[0]
    loglik = np.zeros((Xte.shape[0], n_classes))
    for c in range(n_classes):
        Xc = Xtr[train.labels == c]
        mu = Xc.mean(axis=0)
        var = np.maximum(Xc.var(axis=0), VAR_FLOOR)
        prior = Xc.shape[0] / n
        ll = -0.5 * (np.log(2 * np.pi * var) + (Xte - mu) ** 2 / var).sum(axis=1)
        loglik[:, c] = ll + np.log(prior)
    # normalized posteriors as decision scores
    loglik -= loglik.max(axis=1, keepdims=True)
    post = np.exp(loglik)
    post /= post.sum(axis=1, keepdims=True)
    return np.argmax(loglik, axis=1), post


def fit_predict(spec: ClassifierSpec, train: Dataset, test: Dataset,
                seed: int = 0):
    """Train on `train`, predict `test`; returns (predictions, scores).

    scores is an (n_test, n_classes) array of per-class decision values
    (vote fractions, posteriors, or SVM margins).
    """
    if train.n_genes != test.n_genes:
        raise DimensionMismatch("train and test gene counts differ")
    if train.class_names != test.class_names:
        raise DimensionMismatch("train and test class universes differ")
    n_classes = train.n_classes
    if spec.kind == "knn":
        return _fit_predict_knn(spec, train, test, n_classes)
    if spec.kind == "gaussian_nb":
        return _fit_predict_gnb(spec, train, test, n_classes)
    return _fit_predict_svm(spec, train, test, n_classes, seed)


def confusion(actual, predicted, n_classes: int = None) -> ConfusionMatrix:
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise LengthMismatch("actual and predicted lengths differ")
    if n_classes is None:
        n_classes = int(max(actual.max(initial=-1), predicted.max(initial=-1))) + 1
        n_classes = max(n_classes, 1)
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (actual, predicted), 1)
    return ConfusionMatrix(counts=counts)


def _binary_mcc(tp, fp, fn, tn):
    denom2 = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom2 == 0:
        return 0.0, True
    return (tp * tn - fp * fn) / math.sqrt(denom2), False


def _gorodkin_mcc(counts):
    c = counts.astype(np.float64)
    n = c.sum()
    trace = np.trace(c)
    row = c.sum(axis=1)
    col = c.sum(axis=0)
    cov_xy = trace * n - row @ col
    cov_xx = n * n - col @ col
    cov_yy = n * n - row @ row
    if cov_xx == 0 or cov_yy == 0:
        return 0.0, True
    return cov_xy / math.sqrt(cov_xx * cov_yy), False


def _f1_for_class(counts, c):
    tp = counts[c, c]
    fp = counts[:, c].sum() - tp
    fn = counts[c, :].sum() - tp
    if 2 * tp + fp + fn == 0:
        return 0.0, True
    return 2 * tp / (2 * tp + fp + fn), False


def _rank_auc(pos_scores, neg_scores):
    """Mann-Whitney AUC with average ranks for ties."""
    scores = np.concatenate([pos_scores, neg_scores])
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    n1 = pos_scores.size
    n0 = neg_scores.size
    return (ranks[:n1].sum() - n1 * (n1 + 1) / 2) / (n1 * n0)


def metrics(cm: ConfusionMatrix, scores=None, actual=None) -> MetricReport:
    """Accuracy, F-measure, MCC and AUC from a confusion matrix.

    Binary matrices (class 1 = positive) use the standard two-class
    formulas; multiclass uses macro-F, the Gorodkin correlation, and macro
    one-vs-rest AUC.  A zero denominator yields 0 plus an `undefined` flag
    rather than NaN.
    """
    counts = cm.counts
    k = counts.shape[0]
    undefined = []
    total = counts.sum()
    if total == 0:
        return MetricReport(0.0, 0.0, 0.0, 0.0,
                            ("accuracy", "f_measure", "mcc", "auc"))
    acc = float(np.trace(counts) / total)

    if k == 2:
        tp = counts[1, 1]
        tn = counts[0, 0]
        fp = counts[0, 1]
        fn = counts[1, 0]
        mcc, mcc_undef = _binary_mcc(tp, fp, fn, tn)
        if mcc_undef:
            undefined.append("mcc")
        f1, f1_undef = _f1_for_class(counts, 1)
        if f1_undef:
            undefined.append("f_measure")
    else:
        mcc, mcc_undef = _gorodkin_mcc(counts)
        if mcc_undef:
            undefined.append("mcc")
        f1s = []
        f1_undef = False
        for c in range(k):
            v, u = _f1_for_class(counts, c)
            f1s.append(v)
            f1_undef = f1_undef or u
        f1 = float(np.mean(f1s))
        if f1_undef:
            undefined.append("f_measure")

    auc = 0.0
    if scores is None or actual is None:
        undefined.append("auc")
    else:
        scores = np.asarray(scores, dtype=np.float64)
        actual = np.asarray(actual, dtype=np.int64)
        if k == 2:
            pos = scores[actual == 1, 1]
            neg = scores[actual == 0, 1]
            if pos.size == 0 or neg.size == 0:
                undefined.append("auc")
            else:
                auc = float(_rank_auc(pos, neg))
        else:
            aucs = []
            auc_undef = False
            for c in range(k):
                pos = scores[actual == c, c]
                neg = scores[actual != c, c]
                if pos.size == 0 or neg.size == 0:
                    auc_undef = True
                    aucs.append(0.0)
                else:
                    aucs.append(_rank_auc(pos, neg))
            auc = float(np.mean(aucs))
            if auc_undef:
                undefined.append("auc")

    return MetricReport(accuracy=acc, f_measure=float(f1), mcc=float(mcc),
                        auc=auc, undefined=tuple(undefined))


def cross_validate(d: Dataset, spec: ClassifierSpec, k: int, seed: int):
    """Stratified k-fold evaluation; returns (mean report, per-fold reports).

    Folds and classifier seeds derive from `seed`, so results are
    deterministic and independent of execution order.
    """
    plan = stratified_k_fold(d, k, seed)
    reports = []
    for fold_idx, (train_idx, test_idx) in enumerate(plan.folds):
        train = _take(d, train_idx)
        test = _take(d, test_idx)
        preds, scores = fit_predict(spec, train, test,
                                    seed=mix64(seed, "fold", fold_idx))
        cm = confusion(test.labels, preds, n_classes=d.n_classes)
        reports.append(metrics(cm, scores, test.labels))
    undefined = tuple(sorted({u for r in reports for u in r.undefined}))
    mean = MetricReport(
        accuracy=float(np.mean([r.accuracy for r in reports])),
        f_measure=float(np.mean([r.f_measure for r in reports])),
        mcc=float(np.mean([r.mcc for r in reports])),
        auc=float(np.mean([r.auc for r in reports])),
        undefined=undefined,
    )
    return mean, reports


def _take(d: Dataset, idx) -> Dataset:
    return Dataset(values=d.values[idx], labels=d.labels[idx],
                   gene_names=d.gene_names, class_names=d.class_names,
                   name=d.name)
