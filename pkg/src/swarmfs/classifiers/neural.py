import numpy as np

from swarmfs.classifiers.base import Estimator, register, sigmoid


@register("mlp")
class MLP(Estimator):
    """One ReLU hidden layer, sigmoid output, full-batch gradient descent on cross-entropy."""

    defaults = {"hidden": 16, "learning_rate": 0.1, "epochs": 500}

    def _fit(self, X, y, rng):
        n, d = X.shape
        h = int(self.hidden)
        lim1 = np.sqrt(6.0 / (d + h))
        lim2 = np.sqrt(6.0 / (h + 1))
        W1 = rng.uniform(-lim1, lim1, size=(d, h))
        W2 = rng.uniform(-lim2, lim2, size=h)
        b1 = np.zeros(h)
        b2 = 0.0
        lr = float(self.learning_rate)
        yf = y.astype(float)
        for _ in range(int(self.epochs)):
            Z = X @ W1 + b1
            H = np.maximum(Z, 0.0)
            g = (sigmoid(H @ W2 + b2) - yf) / n
            gH = np.outer(g, W2) * (Z > 0)
            W2 = W2 - lr * (H.T @ g)
            b2 = b2 - lr * g.sum()
            W1 = W1 - lr * (X.T @ gH)
            b1 = b1 - lr * gH.sum(axis=0)
        self.W1_, self.b1_, self.W2_, self.b2_ = W1, b1, W2, b2

    def decision(self, X):
        H = np.maximum(X @ self.W1_ + self.b1_, 0.0)
        return sigmoid(H @ self.W2_ + self.b2_)
