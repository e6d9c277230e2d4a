"""Entropy trees and the ensembles built from them."""
import math

import numpy as np

from swarmfs.classifiers import _kernels
from swarmfs.classifiers.base import Estimator, register
from swarmfs.rng import draw_seed


class Tree:
    """Flat array form of a grown tree."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value

    @classmethod
    def grow(cls, X, y, w, max_depth, min_split, max_features, random_thresholds, seed):
        n = X.shape[0]
        capacity = 2 * n - 1
        if max_depth < 30:
            capacity = min(capacity, 2 ** (max_depth + 1) - 1)
        f, t, l, r, v, used = _kernels.grow_tree(
            np.ascontiguousarray(X, dtype=float),
            np.ascontiguousarray(y, dtype=np.int64),
            np.ascontiguousarray(w, dtype=float),
            int(max_depth),
            int(min_split),
            int(max_features),
            bool(random_thresholds),
            int(capacity),
            int(seed),
        )
        return cls(f[:used], t[:used], l[:used], r[:used], v[:used])

    def values(self, X):
        """Weighted positive fraction of the leaf each row lands in."""
        return _kernels.tree_values(self.feature, self.threshold, self.left, self.right, self.value,
                                    np.ascontiguousarray(X, dtype=float))

    def votes(self, X):
        return (self.values(X) > 0.5).astype(float)

    @property
    def n_nodes(self):
        return self.feature.shape[0]


def _max_features(setting, d):
    if setting == "sqrt":
        return max(1, math.ceil(math.sqrt(d)))
    if setting in (None, "all"):
        return d
    return max(1, min(d, int(setting)))


@register("decision_tree")
class DecisionTree(Estimator):
    defaults = {"max_depth": 10, "min_samples_split": 2}

    def _fit(self, X, y, rng):
        self.tree_ = Tree.grow(X, y, np.ones(len(y)), self.max_depth, self.min_samples_split,
                               X.shape[1], False, draw_seed(rng))

    def decision(self, X):
        return self.tree_.values(X)


class _Forest(Estimator):
    """Majority vote of ``n_estimators`` trees; the score is the share of votes for class 1."""

    bootstrap = True
    random_thresholds = False

    def _fit(self, X, y, rng):
        n, d = X.shape
        mf = _max_features(self.max_features, d)
        self.trees_ = []
        for _ in range(int(self.n_estimators)):
            if self.bootstrap:
                idx = rng.integers(0, n, size=n)
                Xb, yb = X[idx], y[idx]
            else:
                Xb, yb = X, y
            self.trees_.append(Tree.grow(Xb, yb, np.ones(len(yb)), self.max_depth, self.min_samples_split,
                                         mf, self.random_thresholds, draw_seed(rng)))

    def decision(self, X):
        votes = np.zeros(X.shape[0])
        for tree in self.trees_:
            votes += tree.votes(X)
        return votes / len(self.trees_)


@register("random_forest")
class RandomForest(_Forest):
    defaults = {"n_estimators": 100, "max_depth": 10, "min_samples_split": 2, "max_features": "sqrt"}


@register("extra_trees")
class ExtraTrees(_Forest):
    defaults = {"n_estimators": 100, "max_depth": 10, "min_samples_split": 2, "max_features": "sqrt"}
    bootstrap = False
    random_thresholds = True


@register("bagging")
class Bagging(_Forest):
    defaults = {"n_estimators": 10, "max_depth": 10, "min_samples_split": 2, "max_features": "all"}


@register("adaboost")
class AdaBoost(Estimator):
    """Discrete two-class AdaBoost over depth-1 entropy stumps.

    ``errors_`` holds each round's weighted error. Training error after t
    rounds is bounded by the product of 2 sqrt(e (1 - e)) over those rounds,
    which shrinks every round; the error itself need not be monotone.
    """

    threshold = 0.0
    defaults = {"n_estimators": 50, "max_depth": 1}

    def _fit(self, X, y, rng):
        n = X.shape[0]
        s = np.where(y == 1, 1.0, -1.0)
        w = np.full(n, 1.0 / n)
        self.stumps_, self.alphas_, self.errors_ = [], [], []
        for _ in range(int(self.n_estimators)):
            stump = Tree.grow(X, y, w, self.max_depth, 2, X.shape[1], False, draw_seed(rng))
            h = np.where(stump.votes(X) > 0, 1.0, -1.0)
            err = float(w[h != s].sum() / w.sum())
            if err >= 0.5:
                if not self.stumps_:
                    self.stumps_.append(stump)
                    self.alphas_.append(1.0)
                    self.errors_.append(err)
                break
            err = max(err, 1e-10)
            alpha = 0.5 * math.log((1.0 - err) / err)
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            self.errors_.append(err)
            if err <= 1e-10:
                break
            w = w * np.exp(-alpha * s * h)
            w /= w.sum()

    def staged_decision(self, X):
        """Normalized ensemble margin after each boosting round."""
        total = np.zeros(X.shape[0])
        weight = 0.0
        for stump, alpha in zip(self.stumps_, self.alphas_):
            total += alpha * np.where(stump.votes(X) > 0, 1.0, -1.0)
            weight += alpha
            yield total / weight

    def decision(self, X):
        out = None
        for out in self.staged_decision(X):
            pass
        return out
