"""Discrete mutual information and greedy minimum-redundancy
maximum-relevance gene ranking.

All information quantities are in bits (log base 2); the base only rescales
scores and cannot change any argmax.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DiscretizedDataset
from .errors import BadM, EmptySet, LengthMismatch


def mutual_information(x, y) -> float:
    """Plug-in MI estimate (bits) from the empirical joint distribution."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch("columns must be 1-D and of equal length")
    n = x.size
    if n == 0:
        raise LengthMismatch("columns must be non-empty")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    nx = xi.max() + 1
    ny = yi.max() + 1
    joint = np.bincount(xi * ny + yi, minlength=nx * ny).reshape(nx, ny) / n
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nz = joint > 0
    outer = np.outer(px, py)
    mi = float(np.sum(joint[nz] * np.log2(joint[nz] / outer[nz])))
    return max(mi, 0.0)


def entropy(x) -> float:
    """Empirical Shannon entropy in bits."""
    x = np.asarray(x)
    _, counts = np.unique(x, return_counts=True)
    p = counts / x.size
    return float(-np.sum(p * np.log2(p)))


def relevance(genes, labels) -> float:
    """Mean MI between each gene column and the labels."""
    genes = list(genes)
    if not genes:
        raise EmptySet("relevance needs at least one gene")
    return float(np.mean([mutual_information(g, labels) for g in genes]))


def redundancy(genes) -> float:
    """Mean pairwise MI over ordered gene pairs, including i == j."""
    genes = list(genes)
    if not genes:
        raise EmptySet("redundancy needs at least one gene")
    s = 0.0
    for gi in genes:
        for gj in genes:
            s += mutual_information(gi, gj)
    return s / len(genes) ** 2


@dataclass(frozen=True)
class MrmrRanking:
    order: tuple        # gene indices in selection order
    scores: tuple       # incremental criterion value at each pick

    def __post_init__(self):
        if len(self.order) != len(self.scores):
            raise ValueError("order and scores must have equal length")
        if len(set(self.order)) != len(self.order):
            raise ValueError("order contains duplicates")


def mrmr_select(d: DiscretizedDataset, labels, m: int) -> MrmrRanking:
    """Greedy incremental MRMR selection of m genes.

    The first pick maximizes MI with the labels; each later pick maximizes
    relevance minus mean MI with the already-selected set.  Ties break
    toward the lower column index.
    """
    levels = d.levels
    n_genes = levels.shape[1]
    if not 1 <= m <= n_genes:
        raise BadM(f"m must be in [1, {n_genes}], got {m}")
    labels = np.asarray(labels)
    if labels.shape != (levels.shape[0],):
        raise LengthMismatch("labels length must match the sample count")

    rel = np.array([mutual_information(levels[:, j], labels)
                    for j in range(n_genes)])
    redundancy_sum = np.zeros(n_genes)
    selected = []
    scores = []
    remaining = np.ones(n_genes, dtype=bool)
    for step in range(m):
        if step == 0:
            crit = rel.copy()
        else:
            crit = rel - redundancy_sum / step
        crit[~remaining] = -np.inf
        pick = int(np.argmax(crit))  # argmax returns the lowest tied index
        selected.append(pick)
        scores.append(float(crit[pick]))
        remaining[pick] = False
        if step < m - 1:
            picked_col = levels[:, pick]
            for j in np.flatnonzero(remaining):
                redundancy_sum[j] += mutual_information(levels[:, j], picked_col)
    return MrmrRanking(order=tuple(selected), scores=tuple(scores))
