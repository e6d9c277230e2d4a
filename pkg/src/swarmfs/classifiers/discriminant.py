import numpy as np

from swarmfs.classifiers.base import Estimator, register, sigmoid


def _inverse(S):
    try:
        inv = np.linalg.inv(S)
        if np.all(np.isfinite(inv)):
            return inv
    except np.linalg.LinAlgError:
        pass
    return np.linalg.pinv(S)


def _scatter(Xc):
    centered = Xc - Xc.mean(axis=0)
    return centered.T @ centered


class _Discriminant(Estimator):
    def decision(self, X):
        return sigmoid(self._delta(X, 1) - self._delta(X, 0))


@register("lda")
class LDA(_Discriminant):
    """Shared covariance; delta_k(x) = x' S^-1 mu_k - mu_k' S^-1 mu_k / 2 + log pi_k."""

    defaults = {}

    def _fit(self, X, y, rng):
        n = X.shape[0]
        self.means_ = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
        pooled = (_scatter(X[y == 0]) + _scatter(X[y == 1])) / max(n - 2, 1)
        self.precision_ = _inverse(pooled)
        self.log_prior_ = np.log(np.bincount(y, minlength=2) / n)

    def _delta(self, X, k):
        mu = self.means_[k]
        a = self.precision_ @ mu
        return X @ a - 0.5 * mu @ a + self.log_prior_[k]


@register("qda")
class QDA(_Discriminant):
    defaults = {"reg": 1e-6}

    def _fit(self, X, y, rng):
        n, d = X.shape
        self.means_, self.precisions_, self.log_dets_ = [], [], []
        for c in (0, 1):
            Xc = X[y == c]
            cov = _scatter(Xc) / (Xc.shape[0] - 1) if Xc.shape[0] > 1 else np.zeros((d, d))
            cov = cov + self.reg * np.eye(d)
            self.means_.append(Xc.mean(axis=0))
            self.precisions_.append(_inverse(cov))
            self.log_dets_.append(np.linalg.slogdet(cov)[1])
        self.log_prior_ = np.log(np.bincount(y, minlength=2) / n)

    def _delta(self, X, k):
        diff = X - self.means_[k]
        maha = np.einsum("ij,jk,ik->i", diff, self.precisions_[k], diff)
        return -0.5 * maha - 0.5 * self.log_dets_[k] + self.log_prior_[k]
