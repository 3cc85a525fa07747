"""Tabular gene-expression data: loading, validation, discretization,
stratified folding, column subsetting and a synthetic generator with
planted informative genes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ClassTooSmall,
    EmptyFile,
    EmptyMask,
    MalformedRow,
    NonNumericCell,
    SingleClass,
)


@dataclass(frozen=True)
class GeneMask:
    """Boolean selection vector over a candidate gene set."""

    bits: np.ndarray
    selected_count: int = field(init=False)

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "selected_count", int(bits.sum()))

    def __len__(self):
        return len(self.bits)

    @classmethod
    def from_indices(cls, indices, length: int) -> "GeneMask":
        bits = np.zeros(length, dtype=bool)
        bits[list(indices)] = True
        return cls(bits)

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)


@dataclass(frozen=True)
class Dataset:
    """Immutable sample-by-gene expression matrix with class labels."""

    values: np.ndarray
    labels: np.ndarray
    gene_names: tuple
    class_names: tuple
    name: str = "dataset"

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if labels.shape != (values.shape[0],):
            raise ValueError("labels length must equal the number of rows")
        if not np.all(np.isfinite(values)):
            raise NonNumericCell("values contain NaN or Inf")
        if len(self.gene_names) != values.shape[1]:
            raise ValueError("gene_names length must equal the number of columns")
        n_classes = len(self.class_names)
        if n_classes < 2:
            raise SingleClass("at least two classes are required")
        present = np.unique(labels)
        if labels.size and (present.min() < 0 or present.max() >= n_classes):
            raise ValueError("label index out of range")
        values.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "gene_names", tuple(self.gene_names))
        object.__setattr__(self, "class_names", tuple(str(c) for c in self.class_names))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_genes(self) -> int:
        return self.values.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class DiscretizedDataset:
    """Per-gene integer levels derived from a Dataset, same shape."""

    levels: np.ndarray
    n_levels_per_gene: np.ndarray
    source_ref: str

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.int64)
        counts = np.asarray(self.n_levels_per_gene, dtype=np.int64)
        if levels.ndim != 2 or counts.shape != (levels.shape[1],):
            raise ValueError("inconsistent discretized shapes")
        levels.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "n_levels_per_gene", counts)


@dataclass(frozen=True)
class FoldPlan:
    """k stratified (train, test) index pairs partitioning the samples."""

    folds: tuple
    k: int
    seed: int


def load_csv(path, label_col=None) -> Dataset:
    """Parse a CSV with a header row into a Dataset.

    label_col selects the label column by name or integer index; the default
    is the last column.  Label strings map to dense class indices in
    first-appearance order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise EmptyFile(f"{path}: need a header row and at least one data row")
    header = rows[0]
    n_cols = len(header)
    if label_col is None:
        label_idx = n_cols - 1
    elif isinstance(label_col, int):
        label_idx = label_col if label_col >= 0 else n_cols + label_col
    else:
        try:
            label_idx = header.index(label_col)
        except ValueError:
            raise MalformedRow(f"label column {label_col!r} not in header")
    if not 0 <= label_idx < n_cols:
        raise MalformedRow(f"label column index {label_idx} out of range")

    gene_names = tuple(h for i, h in enumerate(header) if i != label_idx)
    values = []
    raw_labels = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != n_cols:
            raise MalformedRow(
                f"{path}:{lineno}: expected {n_cols} columns, got {len(row)}"
            )
        raw_labels.append(row[label_idx])
        sample = []
        for i, cell in enumerate(row):
            if i == label_idx:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericCell(f"{path}:{lineno}: column {i}: {cell!r}")
            if not np.isfinite(v):
                raise NonNumericCell(f"{path}:{lineno}: column {i}: {cell!r}")
            sample.append(v)
        values.append(sample)

    class_names = []
    labels = []
    index = {}
    for lab in raw_labels:
        if lab not in index:
            index[lab] = len(class_names)
            class_names.append(lab)
        labels.append(index[lab])
    if len(class_names) < 2:
        raise SingleClass(f"{path}: only one class present")
    return Dataset(
        values=np.array(values, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        gene_names=gene_names,
        class_names=tuple(class_names),
        name=str(path),
    )


def write_csv(d: Dataset, path, label_col_name: str = "label"):
    """Write a Dataset back to CSV; floats use repr so values round-trip."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.gene_names) + [label_col_name])
        for i in range(d.n_samples):
            row = [repr(float(v)) for v in d.values[i]]
            row.append(d.class_names[d.labels[i]])
            writer.writerow(row)


def discretize(d: Dataset, method: str = "mean_sigma", bins: int = 3,
               t: float = 0.5) -> DiscretizedDataset:
    """Per-gene independent discretization.

    "mean_sigma" maps values below mu - t*sigma to 0, above mu + t*sigma to
    2, else 1 (the usual 3-level MRMR practice for expression data).
    "equal_width" splits [min, max] into `bins` equal-width intervals.
    Constant genes always collapse to the single level 0.
    """
    if method == "equal_width" and bins < 2:
        raise ValueError("equal_width needs bins >= 2")
    if method == "mean_sigma" and t <= 0:
        raise ValueError("mean_sigma needs t > 0")

    n, m = d.values.shape
    levels = np.zeros((n, m), dtype=np.int64)
    counts = np.ones(m, dtype=np.int64)
    for j in range(m):
        col = d.values[:, j]
        lo, hi = col.min(), col.max()
        if lo == hi:
            continue
        if method == "mean_sigma":
            mu = col.mean()
            sig = col.std()
            lev = np.ones(n, dtype=np.int64)
            lev[col < mu - t * sig] = 0
            lev[col > mu + t * sig] = 2
            levels[:, j] = lev
            counts[j] = 3
        elif method == "equal_width":
            width = (hi - lo) / bins
            lev = np.minimum(((col - lo) / width).astype(np.int64), bins - 1)
            levels[:, j] = lev
            counts[j] = bins
        else:
            raise ValueError(f"unknown discretization method {method!r}")
    return DiscretizedDataset(levels=levels, n_levels_per_gene=counts,
                              source_ref=d.name)


def stratified_k_fold(d: Dataset, k: int, seed: int) -> FoldPlan:
    """Deterministic stratified k-fold plan over the dataset's samples.

    Within each class, samples are shuffled by the seed and dealt
    round-robin to folds, so per-class test counts differ by at most 1.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    counts = np.bincount(d.labels, minlength=d.n_classes)
    small = np.flatnonzero(counts < k)
    if small.size:
        raise ClassTooSmall(
            f"class {d.class_names[small[0]]} has {counts[small[0]]} samples, "
            f"fewer than k={k}"
        )
    rng = np.random.default_rng(seed)
    test_sets = [[] for _ in range(k)]
    for c in range(d.n_classes):
        idx = np.flatnonzero(d.labels == c)
        rng.shuffle(idx)
        for i, sample in enumerate(idx):
            test_sets[i % k].append(int(sample))

    all_idx = np.arange(d.n_samples)
    folds = []
    for test in test_sets:
        test_arr = np.array(sorted(test), dtype=np.int64)
        train_arr = np.setdiff1d(all_idx, test_arr)
        folds.append((train_arr, test_arr))
    return FoldPlan(folds=tuple(folds), k=k, seed=seed)


def subset(d: Dataset, mask: GeneMask) -> Dataset:
    """Keep only the masked columns, in their original order."""
    if len(mask) != d.n_genes:
        raise ValueError("mask length must equal the gene count")
    if mask.selected_count < 1:
        raise EmptyMask("mask selects no genes")
    cols = mask.indices()
    return Dataset(
        values=d.values[:, cols],
        labels=d.labels,
        gene_names=tuple(d.gene_names[j] for j in cols),
        class_names=d.class_names,
        name=d.name,
    )


def make_synthetic(n_samples: int, n_informative: int, n_noise: int,
                   n_classes: int, separation: float, seed: int):
    """Generate a dataset with planted informative genes.

    Informative genes are class-conditional normals with unit variance and
    per-class means spaced by separation; noise genes are standard normals
    independent of the class.  Informative columns are scattered at seeded
    random positions; the returned GeneMask marks them.
    """
    if min(n_samples, n_informative, n_noise, n_classes) <= 0:
        raise ValueError("all counts must be positive")
    if n_classes < 2:
        raise ValueError("need at least two classes")
    if separation <= 0:
        raise ValueError("separation must be > 0")
    if n_samples < n_classes:
        raise ValueError("need at least one sample per class")

    rng = np.random.default_rng(seed)
    labels = np.arange(n_samples) % n_classes
    rng.shuffle(labels)

    n_genes = n_informative + n_noise
    values = rng.standard_normal((n_samples, n_genes))
    informative_cols = np.sort(
        rng.choice(n_genes, size=n_informative, replace=False)
    )
    for j in informative_cols:
        values[:, j] += labels * separation

    gene_names = tuple(f"G{j:05d}" for j in range(n_genes))
    class_names = tuple(f"C{c}" for c in range(n_classes))
    d = Dataset(values=values, labels=labels, gene_names=gene_names,
                class_names=class_names, name=f"synthetic-{seed}")
    truth = GeneMask.from_indices(informative_cols, n_genes)
    return d, truth
