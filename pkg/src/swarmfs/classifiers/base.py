from dataclasses import dataclass, field

import numpy as np

from swarmfs.errors import ConfigError, DataError
from swarmfs.rng import stream

REGISTRY = {}


def register(name):
    def deco(cls):
        cls.family = name
        REGISTRY[name] = cls
        return cls

    return deco


class Estimator:
    """One classifier family.

    Subclasses declare ``defaults`` (the documented hyperparameters),
    ``threshold`` (0.5 for probability scores, 0.0 for margins) and implement
    ``_fit(X, y, rng)`` and ``decision(X)``. ``predict`` is always
    ``decision(X) > threshold``, so labels and scores cannot disagree.
    """

    family = None
    defaults = {}
    threshold = 0.5
    requires_nonnegative = False

    def __init__(self, **hp):
        for k, v in hp.items():
            setattr(self, k, v)

    def _fit(self, X, y, rng):
        raise NotImplementedError

    def decision(self, X):
        raise NotImplementedError


class _Constant:
    def __init__(self, label, threshold):
        self.label = int(label)
        if threshold == 0.5:
            self.score = 1.0 if label == 1 else 0.0
        else:
            self.score = 1.0 if label == 1 else -1.0

    def decision(self, X):
        return np.full(X.shape[0], self.score)


@dataclass(frozen=True)
class ModelSpec:
    family: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in REGISTRY:
            raise ConfigError(f"unknown model family {self.family!r}; known: {sorted(REGISTRY)}")
        allowed = REGISTRY[self.family].defaults
        unknown = sorted(set(self.hyperparameters) - set(allowed))
        if unknown:
            raise ConfigError(f"{self.family}: unknown hyperparameters {unknown}; documented: {sorted(allowed)}")
        object.__setattr__(self, "hyperparameters", dict(self.hyperparameters))

    def resolved(self):
        """Hyperparameters with defaults filled in."""
        return {**REGISTRY[self.family].defaults, **self.hyperparameters}

    @property
    def name(self):
        return self.family

    def to_dict(self):
        return {"family": self.family, "hyperparameters": self.resolved(), "seed": self.seed}


class FittedModel:
    def __init__(self, spec, estimator, feature_count):
        self.spec = spec
        self.estimator = estimator
        self.feature_count = feature_count
        self.threshold = REGISTRY[spec.family].threshold

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.feature_count:
            raise DataError(f"{self.spec.family} was fitted on {self.feature_count} features, got shape {X.shape}")
        return X

    def predict_score(self, X):
        return np.asarray(self.estimator.decision(self._check(X)), dtype=float)

    def predict(self, X):
        return (self.predict_score(X) > self.threshold).astype(np.int64)

    @property
    def constant(self):
        return isinstance(self.estimator, _Constant)


def fit(spec, X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"{spec.family}: empty training set")
    if X.shape[1] == 0:
        raise DataError(f"{spec.family}: no features to train on")
    if y.shape != (X.shape[0],):
        raise DataError(f"{spec.family}: {X.shape[0]} rows but {y.shape[0]} labels")
    cls = REGISTRY[spec.family]
    if cls.requires_nonnegative and np.any(X < 0):
        raise DataError(f"{spec.family} requires non-negative features")
    classes = np.unique(y)
    if classes.size == 1:
        return FittedModel(spec, _Constant(classes[0], cls.threshold), X.shape[1])
    est = cls(**spec.resolved())
    est._fit(X, y, stream(spec.seed, "model", spec.family))
    return FittedModel(spec, est, X.shape[1])


def predict(model, X):
    return model.predict(X)


def predict_score(model, X):
    return model.predict_score(X)


def sigmoid(z):
    # tanh form: no overflow for large |z|, exactly 0.5 at 0
    return 0.5 + 0.5 * np.tanh(0.5 * np.asarray(z, dtype=float))
