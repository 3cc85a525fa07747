"""Friedman rank test over an algorithms-by-datasets score table and the
pairwise post-hoc z comparisons.

Tail probabilities come from in-house regularized incomplete gamma and
error-function routines rather than table lookups.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadShape, InconsistentRanks

RANK_SUM_TOL = 1e-9


@dataclass(frozen=True)
class RankMatrix:
    scores: np.ndarray          # k algorithms x n datasets
    higher_is_better: bool
    avg_ranks: np.ndarray       # per-algorithm mean rank, ties averaged

    @classmethod
    def from_scores(cls, scores, higher_is_better: bool) -> "RankMatrix":
        scores = np.asarray(scores, dtype=np.float64)
        ranks = average_ranks(scores, higher_is_better)
        return cls(scores=scores, higher_is_better=higher_is_better,
                   avg_ranks=ranks)


def _rank_column(col, higher_is_better):
    """Ranks with 1 = best; ties get the average of the tied positions."""
    key = -col if higher_is_better else col
    order = np.argsort(key, kind="stable")
    ranks = np.empty(col.size)
    i = 0
    while i < col.size:
        j = i
        while j + 1 < col.size and key[order[j + 1]] == key[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def average_ranks(scores, higher_is_better: bool) -> np.ndarray:
    """Per-algorithm mean rank across datasets (rows = algorithms)."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] < 2 or scores.shape[1] < 1:
        raise BadShape("need a k x n matrix with k >= 2, n >= 1")
    if not np.all(np.isfinite(scores)):
        raise BadShape("scores contain NaN or Inf")
    k, n = scores.shape
    ranks = np.empty_like(scores)
    for j in range(n):
        ranks[:, j] = _rank_column(scores[:, j], higher_is_better)
    return ranks.mean(axis=1)


def _check_rank_sum(avg_ranks, k):
    expected = k * (k + 1) / 2
    total = float(np.sum(avg_ranks))
    if abs(total - expected) > max(RANK_SUM_TOL, 1e-9 * expected):
        raise InconsistentRanks(
            f"average ranks sum to {total}, expected k(k+1)/2 = {expected}"
        )


def friedman_statistic(avg_ranks, k: int, n: int):
    """Friedman chi-square over per-algorithm average ranks.

    Returns (chi_square, p_value) with k-1 degrees of freedom.
    """
    avg_ranks = np.asarray(avg_ranks, dtype=np.float64)
    if avg_ranks.shape != (k,):
        raise BadShape("avg_ranks length must equal k")
    _check_rank_sum(avg_ranks, k)
    chi2 = 12.0 * n / (k * (k + 1)) * float(np.sum(avg_ranks ** 2)) \
        - 3.0 * n * (k + 1)
    return chi2, chi2_sf(chi2, k - 1)


def posthoc_z(avg_ranks, k: int, n: int, names=None, alpha: float = 0.05):
    """All pairwise z statistics: (Ri - Rj) / sqrt(k(k+1)/(6n)).

    Returns a list of dicts with the two-sided normal p-value and the
    rejection flag at `alpha`.
    """
    avg_ranks = np.asarray(avg_ranks, dtype=np.float64)
    if avg_ranks.shape != (k,):
        raise BadShape("avg_ranks length must equal k")
    if names is None:
        names = [f"alg{i}" for i in range(k)]
    se = math.sqrt(k * (k + 1) / (6.0 * n))
    table = []
    for i in range(k):
        for j in range(i + 1, k):
            z = (avg_ranks[i] - avg_ranks[j]) / se
            p = normal_two_sided_p(z)
            table.append({
                "a": names[i], "b": names[j],
                "z": z, "p": p, "significant": bool(p < alpha),
            })
    return table


# -- tail probability routines ----------------------------------------------

def chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution."""
    if x < 0:
        return 1.0
    return regularized_gamma_upper(df / 2.0, x / 2.0)


def normal_two_sided_p(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def regularized_gamma_upper(s: float, x: float) -> float:
    """Q(s, x) = Gamma(s, x) / Gamma(s), via the series for small x and a
    modified Lentz continued fraction otherwise."""
    if x < 0 or s <= 0:
        raise ValueError("require x >= 0 and s > 0")
    if x == 0:
        return 1.0
    if x < s + 1.0:
        return 1.0 - _gamma_p_series(s, x)
    return _gamma_q_contfrac(s, x)


def _gamma_p_series(s, x, eps=1e-16, max_iter=10000):
    term = 1.0 / s
    total = term
    a = s
    for _ in range(max_iter):
        a += 1.0
        term *= x / a
        total += term
        if abs(term) < abs(total) * eps:
            break
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))


def _gamma_q_contfrac(s, x, eps=1e-16, max_iter=10000):
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h
