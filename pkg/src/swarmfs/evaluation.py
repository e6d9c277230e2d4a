"""Binary classification metrics and stratified cross-validation.

Class 1 is the positive class. Ratios whose denominator is zero are defined
as 0 and listed in ``MetricsReport.degenerate``.
"""
from dataclasses import dataclass, field

import numpy as np

from swarmfs import classifiers
from swarmfs.errors import DataError, ModelError
from swarmfs.folds import stratified_folds

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "balanced_accuracy", "auc")
AVERAGING = ("weighted", "positive_class")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    balanced_accuracy: float
    auc: float = None
    averaging: str = "weighted"
    degenerate: list = field(default_factory=list)

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "balanced_accuracy": self.balanced_accuracy,
            "auc": self.auc,
            "averaging": self.averaging,
            "degenerate": list(self.degenerate),
        }


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_index: np.ndarray

    def sizes(self):
        return np.bincount(self.fold_index, minlength=self.k)

    def split(self, i):
        """(train indices, validation indices) for fold ``i``."""
        return np.flatnonzero(self.fold_index != i), np.flatnonzero(self.fold_index == i)


def _labels(v, name):
    v = np.asarray(v)
    if v.ndim != 1:
        raise DataError(f"{name} must be one-dimensional")
    return v.astype(np.int64)


def confusion(y_true, y_pred):
    y_true = _labels(y_true, "y_true")
    y_pred = _labels(y_pred, "y_pred")
    if y_true.shape != y_pred.shape:
        raise DataError(f"length mismatch: {y_true.shape[0]} labels, {y_pred.shape[0]} predictions")
    if y_true.shape[0] == 0:
        raise DataError("cannot score an empty prediction set")
    pos = y_true == 1
    hit = y_pred == 1
    return ConfusionCounts(
        tp=int(np.sum(pos & hit)),
        fp=int(np.sum(~pos & hit)),
        tn=int(np.sum(~pos & ~hit)),
        fn=int(np.sum(pos & ~hit)),
    )


def _ratio(num, den, label, flags):
    if den == 0:
        flags.append(label)
        return 0.0
    return num / den


def _f1(p, r):
    return 0.0 if p + r == 0 else 2.0 * p * r / (p + r)


def metrics(c, averaging="weighted", auc=None):
    if averaging not in AVERAGING:
        raise ValueError(f"averaging must be one of {AVERAGING}")
    n = c.total
    if n <= 0:
        raise DataError("confusion counts are empty")
    flags = []
    prec1 = _ratio(c.tp, c.tp + c.fp, "precision_1", flags)
    rec1 = _ratio(c.tp, c.tp + c.fn, "recall_1", flags)
    prec0 = _ratio(c.tn, c.tn + c.fn, "precision_0", flags)
    rec0 = _ratio(c.tn, c.tn + c.fp, "recall_0", flags)
    accuracy = (c.tp + c.tn) / n
    if averaging == "positive_class":
        precision, recall, f1 = prec1, rec1, _f1(prec1, rec1)
    else:
        n1 = c.tp + c.fn
        n0 = c.tn + c.fp
        precision = (n0 * prec0 + n1 * prec1) / n
        # support-weighted recall is (tn + tp) / n, written that way so it equals accuracy bit for bit
        recall = (c.tn + c.tp) / n
        f1 = (n0 * _f1(prec0, rec0) + n1 * _f1(prec1, rec1)) / n
    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        balanced_accuracy=(rec0 + rec1) / 2.0,
        auc=auc,
        averaging=averaging,
        degenerate=flags,
    )


def auc_roc(y_true, scores):
    """Probability that a random positive outscores a random negative, ties counted half.

    Computed with one sort: every positive is credited with the negatives
    strictly below it plus half of the negatives tied with it.
    """
    y = _labels(y_true, "y_true")
    s = np.asarray(scores, dtype=float)
    if s.shape != y.shape:
        raise DataError(f"length mismatch: {y.shape[0]} labels, {s.shape[0]} scores")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs both classes present")
    order = np.argsort(s, kind="mergesort")
    s_sorted = s[order]
    neg_sorted = (y[order] == 0).astype(np.int64)
    # group boundaries of tied scores
    starts = np.flatnonzero(np.r_[True, s_sorted[1:] != s_sorted[:-1]])
    neg_in_group = np.add.reduceat(neg_sorted, starts)
    pos_in_group = np.add.reduceat(1 - neg_sorted, starts)
    neg_below = np.cumsum(neg_in_group) - neg_in_group
    # doubled credit keeps everything in integers until the final division
    credit2 = int(np.sum(pos_in_group * (2 * neg_below + neg_in_group)))
    return credit2 / (2.0 * n_pos * n_neg)


def auc_pairwise(y_true, scores):
    """Direct O(P*N) evaluation of the same statistic, kept as a reference."""
    y = _labels(y_true, "y_true")
    s = np.asarray(scores, dtype=float)
    pos = s[y == 1]
    neg = s[y == 0]
    if pos.size == 0 or neg.size == 0:
        raise DataError("AUC needs both classes present")
    diff = pos[:, None] - neg[None, :]
    credit2 = 2 * int(np.sum(diff > 0)) + int(np.sum(diff == 0))
    return credit2 / (2.0 * pos.size * neg.size)


def stratified_kfold(table, k, seed):
    return FoldAssignment(k, stratified_folds(table.y, k, seed))


@dataclass
class CrossValidation:
    folds: list
    mean: dict
    sd: dict

    def to_dict(self):
        return {
            "folds": [{"fold": i, **m.to_dict()} for i, m in enumerate(self.folds)],
            "mean": dict(self.mean),
            "sd": dict(self.sd),
        }


def summarize(reports):
    mean, sd = {}, {}
    for name in METRIC_NAMES:
        vals = [getattr(r, name) for r in reports]
        if any(v is None for v in vals):
            mean[name] = sd[name] = None
            continue
        vals = np.asarray(vals, dtype=float)
        mean[name] = float(vals.mean())
        sd[name] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return mean, sd


def score_model(model, X, y, averaging="weighted"):
    """Metrics for a fitted model on (X, y); AUC is omitted when y has one class."""
    scores = model.predict_score(X)
    pred = (scores > model.threshold).astype(np.int64)
    auc = auc_roc(y, scores) if np.unique(y).size == 2 else None
    return metrics(confusion(y, pred), averaging, auc=auc)


def cross_validate(spec, mask, table, k=10, seed=0, averaging="weighted"):
    cols = np.flatnonzero(np.asarray(mask, dtype=bool)) if np.asarray(mask).dtype == bool else np.asarray(mask, dtype=np.int64)
    if cols.size == 0:
        raise DataError("cross-validation needs at least one feature")
    assignment = stratified_kfold(table, k, seed)
    X = table.X[:, cols]
    reports = []
    for i in range(k):
        tr, va = assignment.split(i)
        try:
            model = classifiers.fit(spec, X[tr], table.y[tr])
            reports.append(score_model(model, X[va], table.y[va], averaging))
        except Exception as exc:
            raise ModelError(f"{spec.family}: fold {i}: {exc}") from exc
    mean, sd = summarize(reports)
    return CrossValidation(reports, mean, sd)
