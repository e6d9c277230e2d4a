"""Linear families: logistic, ridge, hinge-loss and online learners."""
import numpy as np

from swarmfs.classifiers import _kernels
from swarmfs.classifiers.base import Estimator, register, sigmoid
from swarmfs.errors import DataError
from swarmfs.folds import stratified_folds
from swarmfs.rng import draw_seed

PENALTY_GRID = (0.001, 0.01, 0.1, 1.0, 10.0)


def _signed(y):
    return np.where(y == 1, 1.0, -1.0)


class _Linear(Estimator):
    threshold = 0.0

    def decision(self, X):
        return X @ self.coef_ + self.intercept_


def _logistic_gd(X, y, C, learning_rate, epochs, train_mask=None):
    """Full-batch gradient descent on mean cross-entropy + |w|^2 / (2 C n).

    ``C`` may be a vector and ``train_mask`` an (n, K) 0/1 matrix, in which
    case K independent models are trained in one batched loop.
    """
    n, d = X.shape
    if train_mask is None:
        train_mask = np.ones((n, 1))
    C = np.broadcast_to(np.asarray(C, dtype=float), (train_mask.shape[1],))
    K = train_mask.shape[1]
    n_k = train_mask.sum(axis=0)
    decay = 1.0 / (C * n_k)
    W = np.zeros((K, d))
    b = np.zeros(K)
    for _ in range(epochs):
        E = (sigmoid(X @ W.T + b) - y[:, None]) * train_mask
        W -= learning_rate * ((E.T @ X) / n_k[:, None] + W * decay[:, None])
        b -= learning_rate * E.sum(axis=0) / n_k
    return W, b


def _inner_folds(y, k, rng):
    k = min(k, int(np.bincount(y, minlength=2).min()))
    if k < 2:
        return None
    return stratified_folds(y, k, draw_seed(rng), "inner")


def _pick(scores, grid, prefer):
    """Best mean accuracy; ties go to the weaker penalty (``prefer`` orders by strength)."""
    best = max(scores)
    tied = [g for g, s in zip(grid, scores) if s == best]
    return prefer(tied)


@register("logistic")
class Logistic(_Linear):
    threshold = 0.5
    defaults = {"learning_rate": 0.1, "epochs": 1000, "C": 1.0}

    def _fit(self, X, y, rng):
        W, b = _logistic_gd(X, y, self.C, self.learning_rate, self.epochs)
        self.coef_, self.intercept_ = W[0], float(b[0])

    def decision(self, X):
        return sigmoid(X @ self.coef_ + self.intercept_)


@register("logistic_cv")
class LogisticCV(Logistic):
    defaults = {"learning_rate": 0.1, "epochs": 1000, "Cs": PENALTY_GRID, "folds": 5}

    def _fit(self, X, y, rng):
        grid = [float(c) for c in self.Cs]
        folds = _inner_folds(y, self.folds, rng)
        if folds is None:
            self.C_ = grid[len(grid) // 2]
        else:
            k = int(folds.max()) + 1
            masks = np.stack([(folds != f) for f in range(k) for _ in grid], axis=1).astype(float)
            Cs = np.array([c for _ in range(k) for c in grid])
            W, b = _logistic_gd(X, y, Cs, self.learning_rate, self.epochs, masks)
            hit = ((X @ W.T + b) > 0) == (y[:, None] == 1)
            acc = np.array([hit[folds == f, f * len(grid) + j].mean() for f in range(k) for j in range(len(grid))])
            mean_acc = acc.reshape(k, len(grid)).mean(axis=0)
            # larger C means a weaker penalty
            self.C_ = _pick(list(mean_acc), grid, max)
        W, b = _logistic_gd(X, y, self.C_, self.learning_rate, self.epochs)
        self.coef_, self.intercept_ = W[0], float(b[0])


def _ridge(X, s, alpha):
    xm = X.mean(axis=0)
    sm = s.mean()
    Xc = X - xm
    A = Xc.T @ Xc + alpha * np.eye(X.shape[1])
    try:
        w = np.linalg.solve(A, Xc.T @ (s - sm))
    except np.linalg.LinAlgError:
        w = np.linalg.lstsq(A, Xc.T @ (s - sm), rcond=None)[0]
    return w, float(sm - xm @ w)


@register("ridge")
class Ridge(_Linear):
    defaults = {"alpha": 1.0}

    def _fit(self, X, y, rng):
        self.coef_, self.intercept_ = _ridge(X, _signed(y), float(self.alpha))


@register("ridge_cv")
class RidgeCV(_Linear):
    defaults = {"alphas": PENALTY_GRID, "folds": 5}

    def _fit(self, X, y, rng):
        grid = [float(a) for a in self.alphas]
        s = _signed(y)
        folds = _inner_folds(y, self.folds, rng)
        if folds is None:
            self.alpha_ = grid[len(grid) // 2]
        else:
            k = int(folds.max()) + 1
            mean_acc = []
            for a in grid:
                accs = []
                for f in range(k):
                    tr, va = folds != f, folds == f
                    w, b = _ridge(X[tr], s[tr], a)
                    accs.append(np.mean((X[va] @ w + b > 0) == (y[va] == 1)))
                mean_acc.append(float(np.mean(accs)))
            self.alpha_ = _pick(mean_acc, grid, min)
        self.coef_, self.intercept_ = _ridge(X, s, self.alpha_)


@register("sgd_hinge")
class SGDHinge(_Linear):
    defaults = {"alpha": 1e-4, "eta0": 0.01, "epochs": 1000}

    def _fit(self, X, y, rng):
        w, b = _kernels.sgd_hinge(
            np.ascontiguousarray(X), _signed(y), float(self.alpha), float(self.eta0), int(self.epochs), draw_seed(rng)
        )
        self.coef_, self.intercept_ = w, float(b)


@register("linear_svm")
class LinearSVM(_Linear):
    """Full-batch subgradient descent on ``alpha/2 |w|^2 + mean hinge``."""

    defaults = {"alpha": 1e-4, "eta0": 0.01, "epochs": 1000}

    def _fit(self, X, y, rng):
        n, d = X.shape
        s = _signed(y)
        w = np.zeros(d)
        b = 0.0
        for e in range(int(self.epochs)):
            lr = self.eta0 / (1.0 + e * self.alpha)
            active = s * (X @ w + b) < 1.0
            sa = s[active]
            w -= lr * (self.alpha * w - (sa @ X[active]) / n)
            b += lr * sa.sum() / n
        self.coef_, self.intercept_ = w, b


@register("perceptron")
class Perceptron(_Linear):
    defaults = {"eta": 1.0, "max_epochs": 1000}

    def _fit(self, X, y, rng):
        w, b = _kernels.perceptron(
            np.ascontiguousarray(X), _signed(y), float(self.eta), int(self.max_epochs), draw_seed(rng)
        )
        self.coef_, self.intercept_ = w, float(b)


@register("passive_aggressive")
class PassiveAggressive(_Linear):
    defaults = {"C": 1.0, "max_epochs": 1000}

    def _fit(self, X, y, rng):
        if self.C <= 0:
            raise DataError("passive_aggressive needs C > 0")
        w, b = _kernels.passive_aggressive(
            np.ascontiguousarray(X), _signed(y), float(self.C), int(self.max_epochs), draw_seed(rng)
        )
        self.coef_, self.intercept_ = w, float(b)
