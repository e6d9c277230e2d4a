"""Naive Bayes families. Scores are posterior P(y=1 | x)."""
import numpy as np

from swarmfs.classifiers.base import Estimator, register, sigmoid


class _NaiveBayes(Estimator):
    def _log_prior(self, y):
        counts = np.bincount(y, minlength=2).astype(float)
        return np.log(counts / counts.sum())

    def decision(self, X):
        jll = self._joint_log_likelihood(X)
        return sigmoid(jll[:, 1] - jll[:, 0])


@register("gaussian_nb")
class GaussianNB(_NaiveBayes):
    defaults = {"var_smoothing": 1e-9}

    def _fit(self, X, y, rng):
        self.epsilon_ = self.var_smoothing * float(np.var(X, axis=0).max())
        self.theta_ = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
        self.var_ = np.stack([X[y == c].var(axis=0) for c in (0, 1)]) + self.epsilon_
        if self.epsilon_ == 0.0:
            # every feature constant: any positive floor keeps the densities finite
            self.var_ = self.var_ + 1e-12
        self.class_log_prior_ = self._log_prior(y)

    def _joint_log_likelihood(self, X):
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * self.var_[c]))
            ll = ll - 0.5 * np.sum((X - self.theta_[c]) ** 2 / self.var_[c], axis=1)
            out[:, c] = self.class_log_prior_[c] + ll
        return out


@register("bernoulli_nb")
class BernoulliNB(_NaiveBayes):
    defaults = {"alpha": 1.0, "binarize": 0.5}
    requires_nonnegative = True

    def _fit(self, X, y, rng):
        B = (X > self.binarize).astype(float)
        counts = np.stack([B[y == c].sum(axis=0) for c in (0, 1)])
        n_c = np.bincount(y, minlength=2).astype(float)
        p = (counts + self.alpha) / (n_c[:, None] + 2.0 * self.alpha)
        self.feature_log_prob_ = np.log(p)
        self.neg_log_prob_ = np.log1p(-p)
        self.class_log_prior_ = self._log_prior(y)

    def _joint_log_likelihood(self, X):
        B = (X > self.binarize).astype(float)
        return B @ self.feature_log_prob_.T + (1.0 - B) @ self.neg_log_prob_.T + self.class_log_prior_


@register("multinomial_nb")
class MultinomialNB(_NaiveBayes):
    defaults = {"alpha": 1.0}
    requires_nonnegative = True

    def _fit(self, X, y, rng):
        counts = np.stack([X[y == c].sum(axis=0) for c in (0, 1)]) + self.alpha
        self.feature_log_prob_ = np.log(counts / counts.sum(axis=1, keepdims=True))
        self.class_log_prior_ = self._log_prior(y)

    def _joint_log_likelihood(self, X):
        return X @ self.feature_log_prob_.T + self.class_log_prior_


@register("complement_nb")
class ComplementNB(_NaiveBayes):
    """Weights come from the feature counts of every class except the scored one."""

    defaults = {"alpha": 1.0}
    requires_nonnegative = True

    def _fit(self, X, y, rng):
        counts = np.stack([X[y == c].sum(axis=0) for c in (0, 1)])
        comp = counts.sum(axis=0) - counts + self.alpha
        self.feature_log_prob_ = -np.log(comp / comp.sum(axis=1, keepdims=True))

    def _joint_log_likelihood(self, X):
        return X @ self.feature_log_prob_.T
