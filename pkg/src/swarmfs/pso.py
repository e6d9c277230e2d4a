"""Adaptive particle swarm search over feature masks.

Particles live in [0, 1]^d. A position decodes to a mask by thresholding at
``theta`` and then repairing the cardinality into ``[k_min, k_max]`` by
keeping the largest coordinates. Each mask is scored by training the wrapped
classifier on the selected columns:

    fitness = 1 - (alpha * accuracy + beta * (1 - |mask| / d))

Lower is better. Inertia falls linearly from ``w_max`` to ``w_min`` while
the cognitive coefficient shrinks and the social one grows.
"""
from dataclasses import asdict, dataclass, field

import numpy as np

from swarmfs import classifiers
from swarmfs.errors import ConfigError, DataError, ModelError
from swarmfs.preprocess import SplitSpec, stratified_split
from swarmfs.rng import stream

EVAL_MODES = ("paper_faithful_test_set", "validation_split")


@dataclass(frozen=True)
class SwarmConfig:
    population: int = 20
    max_iterations: int = 25
    theta: float = 0.3
    k_min: int = 3
    k_max: int = 12
    alpha: float = 0.8
    beta: float = 0.2
    w_max: float = 0.9
    w_min: float = 0.4
    c1_init: float = 2.5
    c1_final: float = 1.5
    c2_init: float = 1.5
    c2_final: float = 2.5
    seed: int = 0
    fitness_eval_mode: str = "paper_faithful_test_set"

    def __post_init__(self):
        if abs(self.alpha + self.beta - 1.0) > 1e-12:
            raise ConfigError(f"alpha + beta must equal 1, got {self.alpha} + {self.beta}")
        if not 1 <= self.k_min <= self.k_max:
            raise ConfigError(f"need 1 <= k_min <= k_max, got {self.k_min}, {self.k_max}")
        if not 0.0 < self.theta < 1.0:
            raise ConfigError("theta must lie in (0, 1)")
        if self.population < 2:
            raise ConfigError("population must be at least 2")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        if self.fitness_eval_mode not in EVAL_MODES:
            raise ConfigError(f"fitness_eval_mode must be one of {EVAL_MODES}")

    def to_dict(self):
        return asdict(self)


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float = float("inf")


@dataclass
class PsoResult:
    gbest_position: np.ndarray
    gbest_mask: np.ndarray
    gbest_fitness: float
    best_accuracy: float
    fitness_history: list
    evaluations: int
    unique_fits: int = 0
    evaluated_sizes: list = field(default_factory=list)

    @property
    def selected(self):
        return [int(i) for i in np.flatnonzero(self.gbest_mask)]

    def to_dict(self, feature_names=None):
        out = {
            "selected_indices": self.selected,
            "n_selected": len(self.selected),
            "gbest_fitness": self.gbest_fitness,
            "best_accuracy": self.best_accuracy,
            "fitness_history": [float(f) for f in self.fitness_history],
            "evaluations": self.evaluations,
            "unique_fits": self.unique_fits,
            "gbest_position": [float(v) for v in self.gbest_position],
            "min_evaluated_size": int(min(self.evaluated_sizes)) if self.evaluated_sizes else None,
            "max_evaluated_size": int(max(self.evaluated_sizes)) if self.evaluated_sizes else None,
        }
        if feature_names is not None:
            out["selected_features"] = sorted(feature_names[i] for i in self.selected)
        return out


def decode_mask(position, theta, k_min, k_max):
    """Threshold ``position > theta``, then repair the count into ``[k_min, k_max]``.

    Repair keeps the largest coordinates; equal values favour the lower index.
    """
    position = np.asarray(position, dtype=float)
    d = position.shape[0]
    if d < k_min:
        raise DataError(f"cannot select {k_min} features out of {d}")
    mask = position > theta
    count = int(mask.sum())
    if k_min <= count <= k_max:
        return mask
    k = k_min if count < k_min else k_max
    ranked = np.lexsort((np.arange(d), -position))
    mask = np.zeros(d, dtype=bool)
    mask[ranked[:k]] = True
    return mask


def fitness(accuracy, selected, d, alpha, beta):
    if selected <= 0:
        raise ValueError("fitness is undefined for an empty feature subset")
    if selected > d:
        raise ValueError(f"{selected} selected features out of {d}")
    return 1.0 - (alpha * accuracy + beta * (1.0 - selected / d))


def schedule(t, T, cfg=None):
    """Linearly interpolated (w, c1, c2) at iteration ``t`` of ``T``."""
    if T <= 0:
        raise ValueError("T must be positive")
    if not 0 <= t <= T:
        raise ValueError(f"iteration {t} outside [0, {T}]")
    cfg = cfg or SwarmConfig()
    frac = t / T
    w = cfg.w_max - (cfg.w_max - cfg.w_min) * frac
    c1 = cfg.c1_init - (cfg.c1_init - cfg.c1_final) * frac
    c2 = cfg.c2_init + (cfg.c2_final - cfg.c2_init) * frac
    return w, c1, c2


def update_particle(p, gbest, w, c1, c2, rng):
    """One velocity/position step; draws r1 then r2, d uniforms each."""
    x, v, pb = p.position, p.velocity, p.pbest_position
    gbest = np.asarray(gbest, dtype=float)
    if not (x.shape == v.shape == pb.shape == gbest.shape):
        raise ValueError("particle vectors and gbest must share one dimension")
    d = x.shape[0]
    r1 = rng.random(d)
    r2 = rng.random(d)
    v_new = w * v + c1 * r1 * (pb - x) + c2 * r2 * (gbest - x)
    x_new = np.clip(x + v_new, 0.0, 1.0)
    return Particle(x_new, v_new, pb.copy(), p.pbest_fitness)


def _fitness_sets(train, test, cfg):
    if cfg.fitness_eval_mode == "paper_faithful_test_set":
        return train, test
    return stratified_split(train, SplitSpec(0.2, int(stream(cfg.seed, "pso", "validation").integers(2**63))))


def optimize(train, test, spec, cfg, on_iteration=None):
    """Search feature masks for ``spec`` and return the best one found.

    In ``paper_faithful_test_set`` mode particles are scored on ``test``
    itself; ``validation_split`` scores them on a seeded 80:20 split of
    ``train`` and never looks at ``test``.
    """
    if train.d != test.d:
        raise DataError(f"train has {train.d} features, test has {test.d}")
    if min(train.class_counts()) == 0:
        raise DataError("training table must contain both classes")
    d = train.d
    if cfg.k_min > d:
        raise ConfigError(f"k_min={cfg.k_min} exceeds the {d} available features")
    # a cap above d means "no upper limit"
    k_max = min(cfg.k_max, d)
    fit_set, score_set = _fitness_sets(train, test, cfg)

    cache = {}
    sizes = []

    def evaluate(mask, t, i):
        key = mask.tobytes()
        if key not in cache:
            cols = np.flatnonzero(mask)
            try:
                model = classifiers.fit(spec, fit_set.X[:, cols], fit_set.y)
                acc = float(np.mean(model.predict(score_set.X[:, cols]) == score_set.y))
            except Exception as exc:
                raise ModelError(f"{spec.family}: fit failed at iteration {t}, particle {i}: {exc}") from exc
            cache[key] = acc
        sizes.append(int(mask.sum()))
        acc = cache[key]
        return acc, fitness(acc, int(mask.sum()), d, cfg.alpha, cfg.beta)

    rngs = [stream(cfg.seed, "pso", "particle", i) for i in range(cfg.population)]
    swarm = []
    for rng in rngs:
        x = rng.random(d)
        v = rng.uniform(-0.5, 0.5, d)
        swarm.append(Particle(x, v, x.copy()))

    gbest, gbest_fit, gbest_acc = None, float("inf"), 0.0
    history = []
    T = cfg.max_iterations
    for t in range(1, T + 1):
        w, c1, c2 = schedule(t, T, cfg)
        for i, p in enumerate(swarm):
            mask = decode_mask(p.position, cfg.theta, cfg.k_min, k_max)
            acc, fit_i = evaluate(mask, t, i)
            if fit_i < p.pbest_fitness:
                p.pbest_position = p.position.copy()
                p.pbest_fitness = fit_i
            if fit_i < gbest_fit:
                gbest, gbest_fit, gbest_acc = p.position.copy(), fit_i, acc
        history.append(gbest_fit)
        if on_iteration is not None:
            on_iteration(t, gbest_fit)
        swarm = [update_particle(p, gbest, w, c1, c2, rng) for p, rng in zip(swarm, rngs)]

    mask = decode_mask(gbest, cfg.theta, cfg.k_min, k_max)
    return PsoResult(
        gbest_position=gbest,
        gbest_mask=mask,
        gbest_fitness=fitness(gbest_acc, int(mask.sum()), d, cfg.alpha, cfg.beta),
        best_accuracy=gbest_acc,
        fitness_history=history,
        evaluations=cfg.population * T,
        unique_fits=len(cache),
        evaluated_sizes=sizes,
    )


def _discretize(column, bins):
    lo, hi = column.min(), column.max()
    if hi <= lo:
        return np.zeros(column.shape[0], dtype=np.int64)
    idx = np.floor((column - lo) / (hi - lo) * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def mutual_information_counts(joint):
    """I(X; Y) in bits from a joint count table; empty cells contribute 0."""
    joint = np.asarray(joint, dtype=float)
    total = joint.sum()
    pxy = joint / total
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    return float(np.sum(pxy[nz] * np.log2(pxy[nz] / (px @ py)[nz])))


def mutual_information(mask, table, bins=10):
    """Mean over selected features of I(feature; label) with equal-width bins."""
    if bins < 2:
        raise ValueError("bins must be at least 2")
    cols = np.flatnonzero(np.asarray(mask, dtype=bool)) if np.asarray(mask).dtype == bool else np.asarray(mask)
    if len(cols) == 0:
        raise ValueError("mutual information of an empty mask")
    values = []
    for j in cols:
        xb = _discretize(table.X[:, j], bins)
        joint = np.zeros((bins, 2))
        np.add.at(joint, (xb, table.y), 1)
        values.append(mutual_information_counts(joint))
    return float(np.mean(values))
