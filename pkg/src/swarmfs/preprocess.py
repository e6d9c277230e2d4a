"""Ingestion and cleaning of tabular binary-classification data.

The cleaning pipeline is: IQR outlier census, P5/P95 winsorization, label
encoding, min-max scaling to [0, 1] and a stratified train/test split.
Quantiles everywhere use linear interpolation of order statistics at rank
``q * (n - 1)``.
"""
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from swarmfs.errors import DataError
from swarmfs.rng import stream


@dataclass(frozen=True)
class DataTable:
    feature_names: tuple
    X: np.ndarray
    y: np.ndarray
    # original row positions, kept through splits so partitions can be audited
    row_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=np.int64)
        names = tuple(str(n) for n in self.feature_names)
        if X.ndim != 2:
            raise DataError("X must be a 2-D matrix")
        if X.shape[1] != len(names):
            raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        if y.shape != (X.shape[0],):
            raise DataError("y must have one label per row of X")
        if not np.all(np.isfinite(X)):
            raise DataError("X contains NaN or infinite values")
        if np.any((y != 0) & (y != 1)):
            raise DataError("labels must be 0 or 1")
        row_ids = np.arange(X.shape[0]) if self.row_ids is None else np.asarray(self.row_ids)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "row_ids", row_ids.astype(np.int64))

    @property
    def N(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def rows(self, index):
        index = np.asarray(index, dtype=np.int64)
        return DataTable(self.feature_names, self.X[index], self.y[index], self.row_ids[index])

    def columns(self, mask):
        """Restrict to the features selected by a boolean mask or index list."""
        idx = _mask_indices(mask, self.d)
        return DataTable(tuple(self.feature_names[i] for i in idx), self.X[:, idx], self.y, self.row_ids)

    def class_counts(self):
        return int(np.sum(self.y == 0)), int(np.sum(self.y == 1))


def _mask_indices(mask, d):
    mask = np.asarray(mask)
    if mask.dtype == bool:
        if mask.shape != (d,):
            raise DataError(f"mask has length {mask.shape[0]}, table has {d} features")
        return np.flatnonzero(mask)
    return mask.astype(np.int64)


def encode_labels(raw, positive_label):
    """Map ``positive_label`` to 1 and the other category to 0."""
    raw = [str(v) for v in raw]
    distinct = sorted(set(raw))
    if len(distinct) > 2:
        raise DataError(f"expected two label categories, found {len(distinct)}: {distinct}")
    if len(distinct) == 2 and positive_label not in distinct:
        raise DataError(f"positive label {positive_label!r} not among {distinct}")
    return np.array([1 if v == positive_label else 0 for v in raw], dtype=np.int64)


def load_csv(path, label_column, positive_label, drop_columns=()):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError(f"{path}: empty file, header row expected")
        header = [h.strip() for h in header]
        if any(not h for h in header):
            raise DataError(f"{path}: blank column name in header")
        dupes = sorted({h for h in header if header.count(h) > 1})
        if dupes:
            raise DataError(f"{path}: duplicate column names {dupes}")
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found")
        missing = [c for c in drop_columns if c not in header]
        if missing:
            raise DataError(f"{path}: columns to drop not found: {missing}")
        label_pos = header.index(label_column)
        feature_pos = [i for i, h in enumerate(header) if h != label_column and h not in drop_columns]
        labels, rows = [], []
        for line_no, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise DataError(f"{path}: line {line_no} has {len(record)} cells, expected {len(header)}")
            values = []
            for i in feature_pos:
                cell = record[i].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: line {line_no}, column {header[i]!r}: cannot parse {cell!r} as a number"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: line {line_no}, column {header[i]!r}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
            labels.append(record[label_pos].strip())
    if not rows:
        raise DataError(f"{path}: no data rows")
    y = encode_labels(labels, positive_label)
    return DataTable(tuple(header[i] for i in feature_pos), np.array(rows, dtype=float), y)


def iqr_bounds(column):
    """Tukey fences ``(Q1 - 1.5 IQR, Q3 + 1.5 IQR)``."""
    column = np.asarray(column, dtype=float)
    if column.size == 0:
        raise DataError("iqr_bounds of an empty column")
    q1, q3 = np.quantile(column, [0.25, 0.75])
    iqr = q3 - q1
    return float(q1 - 1.5 * iqr), float(q3 + 1.5 * iqr)


def count_outliers(column):
    lo, hi = iqr_bounds(column)
    column = np.asarray(column, dtype=float)
    return int(np.sum((column < lo) | (column > hi)))


@dataclass(frozen=True)
class WinsorBounds:
    p_low: np.ndarray
    p_high: np.ndarray


def fit_winsor(X, lower=5.0, upper=95.0):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    lo, hi = np.percentile(X, [lower, upper], axis=0)
    return WinsorBounds(lo, hi)


def winsorize(column, p_low, p_high):
    """Replace values below ``p_low`` with it and above ``p_high`` with it."""
    return np.clip(np.asarray(column, dtype=float), p_low, p_high)


def apply_winsor(X, bounds):
    return np.clip(np.asarray(X, dtype=float), bounds.p_low, bounds.p_high)


@dataclass(frozen=True)
class ScalerParams:
    min: np.ndarray
    max: np.ndarray


def fit_scaler(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("fit_scaler needs a non-empty 2-D matrix")
    return ScalerParams(X.min(axis=0), X.max(axis=0))


def apply_scaler(X, s):
    """Min-max scale into [0, 1]; constant features map to 0, held-out values are clipped."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != s.min.shape[0]:
        raise DataError(f"scaler fitted on {s.min.shape[0]} columns, got matrix of shape {X.shape}")
    span = s.max - s.min
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (X - s.min) / safe, 0.0)
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise DataError("test_fraction must lie strictly between 0 and 1")


def stratified_test_counts(class_sizes, test_fraction):
    """Per-class test counts: floors, then largest remainders (ties to the lower class)."""
    n = sum(class_sizes)
    target = int(math.floor(n * test_fraction + 0.5))
    exact = [c * test_fraction for c in class_sizes]
    counts = [int(math.floor(e)) for e in exact]
    order = sorted(range(len(class_sizes)), key=lambda c: (-(exact[c] - counts[c]), c))
    for c in order[: max(0, target - sum(counts))]:
        counts[c] += 1
    return counts


def stratified_split(table, spec):
    sizes = table.class_counts()
    if min(sizes) == 0:
        raise DataError(f"stratified split needs both classes, got counts {sizes}")
    if table.N * spec.test_fraction < 1:
        raise DataError("test fraction leaves an empty test set")
    counts = stratified_test_counts(sizes, spec.test_fraction)
    rng = stream(spec.seed, "split")
    test_idx = []
    for label, n_test in enumerate(counts):
        members = np.flatnonzero(table.y == label)
        test_idx.append(rng.permutation(members)[:n_test])
    test_idx = np.sort(np.concatenate(test_idx))
    train_idx = np.setdiff1d(np.arange(table.N), test_idx)
    return table.rows(train_idx), table.rows(test_idx)


@dataclass
class Prepared:
    train: DataTable
    test: DataTable
    summary: dict

    @property
    def full(self):
        """Cleaned train and test rows, restored to file order."""
        X = np.vstack([self.train.X, self.test.X])
        y = np.concatenate([self.train.y, self.test.y])
        ids = np.concatenate([self.train.row_ids, self.test.row_ids])
        order = np.argsort(ids, kind="stable")
        return DataTable(self.train.feature_names, X[order], y[order], ids[order])


def prepare(table, test_fraction=0.2, seed=0, mode="paper"):
    """Run the full cleaning pipeline.

    ``mode="paper"`` fits winsorization and scaling on the whole table before
    splitting, as the published workflow does; ``mode="train_only"`` fits
    both on the training rows only and applies them to the test rows.
    """
    if mode not in ("paper", "train_only"):
        raise DataError(f"unknown preprocessing mode {mode!r}")
    outliers = {name: count_outliers(table.X[:, j]) for j, name in enumerate(table.feature_names)}
    raw_train, raw_test = stratified_split(table, SplitSpec(test_fraction, seed))
    fit_on = table.X if mode == "paper" else raw_train.X
    bounds = fit_winsor(fit_on)
    scaler = fit_scaler(apply_winsor(fit_on, bounds))

    def clean(part):
        X = apply_scaler(apply_winsor(part.X, bounds), scaler)
        return DataTable(part.feature_names, X, part.y, part.row_ids)

    train, test = clean(raw_train), clean(raw_test)
    n0, n1 = table.class_counts()
    summary = {
        "n_samples": table.N,
        "n_features": table.d,
        "missing_cells": 0,
        "class_counts": {"0": n0, "1": n1},
        "outliers_per_feature": outliers,
        "total_outliers": int(sum(outliers.values())),
        "mode": mode,
        "test_fraction": test_fraction,
        "train_size": train.N,
        "test_size": test.N,
        "train_class_counts": dict(zip("01", train.class_counts())),
        "test_class_counts": dict(zip("01", test.class_counts())),
    }
    return Prepared(train, test, summary)
