"""Shapley attributions of model scores.

The value of a coalition S for an instance x is the mean model score over
background rows b, where each row takes the features in S from x and the
rest from b. ``exact_shapley`` enumerates every coalition; ``kernel_shap``
solves the Shapley-kernel weighted regression, enumerating all coalitions
when the budget allows and sampling them otherwise.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

from swarmfs.errors import DataError, DegenerateError
from swarmfs.rng import stream

MAX_EXACT_FEATURES = 16
# rows scored per model call when evaluating coalitions
CHUNK_ROWS = 1 << 18


@dataclass
class Attribution:
    values: np.ndarray
    base_value: float
    score: float

    @property
    def residual(self):
        """score - (base + sum of values); zero when the attribution is additive."""
        return self.score - (self.base_value + float(np.sum(self.values)))


@dataclass
class ShapSummary:
    feature_names: list
    mean_abs: dict
    ranking: list
    matrix: np.ndarray

    def to_dict(self):
        return {
            "ranking": list(self.ranking),
            "mean_abs_shapley": {name: self.mean_abs[name] for name in self.ranking},
        }


def _scorer(model):
    return model.predict_score if hasattr(model, "predict_score") else model


def _inputs(background, instance):
    bg = np.atleast_2d(np.asarray(background, dtype=float))
    x = np.asarray(instance, dtype=float).ravel()
    if bg.shape[0] == 0:
        raise DataError("background set is empty")
    if bg.shape[1] != x.shape[0]:
        raise DataError(f"background has {bg.shape[1]} features, instance has {x.shape[0]}")
    return bg, x


def coalition_values(model, background, instance, coalitions):
    """v(S) for each row of the boolean matrix ``coalitions``."""
    f = _scorer(model)
    bg, x = _inputs(background, instance)
    Z = np.asarray(coalitions, dtype=bool)
    B, m = bg.shape
    out = np.empty(Z.shape[0])
    step = max(1, CHUNK_ROWS // B)
    for start in range(0, Z.shape[0], step):
        z = Z[start:start + step]
        rows = np.where(z[:, None, :], x[None, None, :], bg[None, :, :]).reshape(-1, m)
        out[start:start + step] = np.asarray(f(rows), dtype=float).reshape(z.shape[0], B).mean(axis=1)
    return out


def _all_coalitions(m):
    codes = np.arange(1 << m)
    return ((codes[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)


def exact_shapley(model, background, instance):
    bg, x = _inputs(background, instance)
    m = x.shape[0]
    if m > MAX_EXACT_FEATURES:
        raise DataError(f"exact enumeration supports at most {MAX_EXACT_FEATURES} features, got {m}")
    Z = _all_coalitions(m)
    v = coalition_values(model, bg, x, Z)
    sizes = Z.sum(axis=1)
    # weight |S|! (m - |S| - 1)! / m! for coalitions not containing j
    weight = np.array([math.factorial(s) * math.factorial(m - s - 1) / math.factorial(m) if s < m else 0.0
                       for s in range(m + 1)])
    codes = np.arange(1 << m)
    phi = np.empty(m)
    for j in range(m):
        without = codes[(codes >> j) & 1 == 0]
        phi[j] = float(np.sum(weight[sizes[without]] * (v[without | (1 << j)] - v[without])))
    return Attribution(phi, float(v[0]), float(v[-1]))


def kernel_weight(m, size):
    return (m - 1) / (math.comb(m, size) * size * (m - size))


def _sample_coalitions(m, n, rng):
    sizes = np.arange(1, m)
    p = (m - 1) / (sizes * (m - sizes))
    p = p / p.sum()
    Z = np.zeros((n, m), dtype=bool)
    for r, k in enumerate(rng.choice(sizes, size=n, p=p)):
        Z[r, rng.choice(m, size=k, replace=False)] = True
    return Z


def kernel_shap(model, background, instance, n_coalitions, seed=0, row=0):
    """Shapley-kernel weighted least squares with the additivity constraint built in.

    With ``n_coalitions >= 2^m - 2`` every proper coalition is used once with
    its kernel weight and the solution is the exact Shapley vector.
    Otherwise coalitions are drawn from the kernel distribution and weighted
    equally; ``row`` selects an independent sample stream per explained row.
    """
    bg, x = _inputs(background, instance)
    m = x.shape[0]
    full = (1 << m) - 2
    # below m + 2 sampled rows the regression is underdetermined; full enumeration is exact at any m
    if n_coalitions < min(m + 2, full):
        raise DataError(f"need at least {min(m + 2, full)} coalitions for {m} features, got {n_coalitions}")
    ends = coalition_values(model, bg, x, np.array([np.zeros(m, bool), np.ones(m, bool)]))
    base, score = float(ends[0]), float(ends[1])
    total = score - base
    if m == 1:
        return Attribution(np.array([total]), base, score)
    if n_coalitions >= full:
        Z = _all_coalitions(m)[1:-1]
        sizes = Z.sum(axis=1)
        w = np.array([kernel_weight(m, int(s)) for s in sizes])
    else:
        Z = _sample_coalitions(m, int(n_coalitions), stream(seed, "kernel_shap", row))
        w = np.ones(Z.shape[0])
    y = coalition_values(model, bg, x, Z) - base
    zf = Z.astype(float)
    # substitute phi_last = total - sum(others)
    A = zf[:, :-1] - zf[:, -1:]
    target = y - zf[:, -1] * total
    AtW = A.T * w
    M = AtW @ A
    if np.linalg.matrix_rank(M) < m - 1:
        raise DegenerateError("coalition design is singular; use exact enumeration")
    head = np.linalg.solve(M, AtW @ target)
    phi = np.append(head, total - head.sum())
    return Attribution(phi, base, score)


def sample_background(X, size=100, seed=0):
    """``size`` distinct rows drawn with the seed, in their original order; all rows if fewer."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] == 0:
        raise DataError("cannot draw a background from an empty table")
    if X.shape[0] <= size:
        return X.copy()
    idx = np.sort(stream(seed, "background").choice(X.shape[0], size=size, replace=False))
    return X[idx]


def explain_rows(model, background, X, method="exact", n_coalitions=2048, seed=0):
    out = []
    for i, row in enumerate(np.asarray(X, dtype=float)):
        if method == "exact":
            out.append(exact_shapley(model, background, row))
        else:
            out.append(kernel_shap(model, background, row, n_coalitions, seed, i))
    return out


def summarize(attributions, feature_names):
    if not attributions:
        raise DataError("no attributions to summarize")
    widths = {a.values.shape[0] for a in attributions}
    if len(widths) != 1 or widths != {len(feature_names)}:
        raise DataError(f"attribution widths {sorted(widths)} do not match {len(feature_names)} feature names")
    matrix = np.vstack([a.values for a in attributions])
    means = np.abs(matrix).mean(axis=0)
    mean_abs = {name: float(v) for name, v in zip(feature_names, means)}
    ranking = sorted(feature_names, key=lambda name: (-mean_abs[name], name))
    return ShapSummary(list(feature_names), mean_abs, ranking, matrix)


def write_attribution_csv(path, summary, X, row_ids=None):
    """One row per (sample, feature): feature value and its Shapley value."""
    X = np.asarray(X, dtype=float)
    ids = list(range(X.shape[0])) if row_ids is None else list(row_ids)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "feature", "value", "shapley"])
        for r in range(X.shape[0]):
            for j, name in enumerate(summary.feature_names):
                w.writerow([ids[r], name, repr(float(X[r, j])), repr(float(summary.matrix[r, j]))])
