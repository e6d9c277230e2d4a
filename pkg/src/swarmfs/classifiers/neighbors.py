import numpy as np

from swarmfs.classifiers.base import Estimator, register


def _sq_distances(A, B, chunk=1024):
    out = np.empty((A.shape[0], B.shape[0]))
    for start in range(0, A.shape[0], chunk):
        diff = A[start:start + chunk, None, :] - B[None, :, :]
        out[start:start + chunk] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


@register("knn")
class KNN(Estimator):
    """k nearest neighbours by Euclidean distance.

    Equal distances keep the lower training index first; the score is the
    positive share of the k neighbours, so a split vote scores 0.5 and
    predicts class 0.
    """

    defaults = {"k": 5}

    def _fit(self, X, y, rng):
        self.X_ = X.copy()
        self.y_ = y.astype(float)

    def decision(self, X):
        k = min(int(self.k), self.X_.shape[0])
        out = np.empty(X.shape[0])
        for start in range(0, X.shape[0], 1024):
            d2 = _sq_distances(X[start:start + 1024], self.X_)
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
            out[start:start + 1024] = self.y_[nearest].mean(axis=1)
        return out


@register("nearest_centroid")
class NearestCentroid(Estimator):
    threshold = 0.0
    defaults = {}

    def _fit(self, X, y, rng):
        self.centroids_ = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])

    def decision(self, X):
        d0 = np.sqrt(((X - self.centroids_[0]) ** 2).sum(axis=1))
        d1 = np.sqrt(((X - self.centroids_[1]) ** 2).sum(axis=1))
        return d0 - d1
