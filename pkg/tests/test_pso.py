import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swarmfs import pso
from swarmfs.classifiers import ModelSpec
from swarmfs.errors import ConfigError, DataError, ModelError
from swarmfs.pso import Particle, SwarmConfig, decode_mask, fitness, mutual_information, optimize, schedule
from swarmfs.preprocess import DataTable

unit = st.floats(0.0, 1.0, allow_nan=False)


def predictive_table(n=120, seed=0):
    """Feature 0 is the label plus tiny noise; features 1..9 are pure noise."""
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    X = rng.random((n, 10))
    X[:, 0] = y + rng.normal(scale=0.01, size=n)
    return DataTable(tuple(f"f{j}" for j in range(10)), X, y)


# --- decoding and fitness -------------------------------------------------------

def test_decode_examples():
    pos = np.array([0.9, 0.1, 0.5, 0.2])
    assert np.flatnonzero(decode_mask(pos, 0.3, 1, 4)).tolist() == [0, 2]
    assert np.flatnonzero(decode_mask(pos, 0.3, 3, 4)).tolist() == [0, 2, 3]
    low = np.array([0.05, 0.2, 0.1, 0.25, 0.15])
    assert np.flatnonzero(decode_mask(low, 0.3, 3, 5)).tolist() == [1, 3, 4]
    with pytest.raises(DataError):
        decode_mask(np.array([0.5, 0.5]), 0.3, 3, 4)


def test_decode_threshold_is_strict_and_ties_prefer_lower_index():
    assert not decode_mask(np.array([0.3, 0.9, 0.9]), 0.3, 1, 3)[0]
    mask = decode_mask(np.array([0.5, 0.9, 0.5, 0.5]), 0.3, 1, 2)
    assert np.flatnonzero(mask).tolist() == [0, 1]


@given(arrays(float, st.integers(3, 30), elements=unit), st.floats(0.01, 0.99), st.data())
def test_decoded_cardinality(position, theta, data):
    d = position.shape[0]
    k_min = data.draw(st.integers(1, d))
    k_max = data.draw(st.integers(k_min, d))
    mask = decode_mask(position, theta, k_min, k_max)
    assert k_min <= mask.sum() <= k_max
    if k_min <= np.sum(position > theta) <= k_max:
        np.testing.assert_array_equal(mask, position > theta)
    else:
        # repaired masks keep the largest coordinates
        assert position[mask].min() >= position[~mask].max() if (~mask).any() else True


def test_fitness_examples():
    assert fitness(0.9912, 12, 30, 0.8, 0.2) == pytest.approx(0.08704, abs=1e-12)
    assert fitness(1.0, 30, 30, 0.8, 0.2) == pytest.approx(0.2, abs=1e-15)
    assert fitness(0.0, 30, 30, 0.8, 0.2) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        fitness(0.9, 0, 30, 0.8, 0.2)


def test_schedule_examples():
    assert schedule(0, 25) == pytest.approx((0.9, 2.5, 1.5))
    assert schedule(25, 25) == pytest.approx((0.4, 1.5, 2.5))
    assert schedule(10, 20) == pytest.approx((0.65, 2.0, 2.0))
    with pytest.raises(ValueError):
        schedule(0, 0)
    custom = SwarmConfig(w_max=1.0, w_min=0.0, c1_init=3.0, c1_final=1.0, c2_init=0.0, c2_final=4.0)
    assert schedule(1, 4, custom) == pytest.approx((0.75, 2.5, 1.0))


def test_config_validation():
    with pytest.raises(ConfigError):
        SwarmConfig(alpha=0.7, beta=0.2)
    with pytest.raises(ConfigError):
        SwarmConfig(k_min=5, k_max=4)
    with pytest.raises(ConfigError):
        SwarmConfig(theta=1.0)
    with pytest.raises(ConfigError):
        SwarmConfig(population=1)
    with pytest.raises(ConfigError):
        SwarmConfig(fitness_eval_mode="test")


# --- particle update ------------------------------------------------------------

class Ones:
    def random(self, d):
        return np.ones(d)


def test_update_examples():
    x = np.full(3, 0.4)
    p = Particle(x.copy(), np.zeros(3), x.copy())
    q = pso.update_particle(p, x.copy(), 0.7, 2.0, 2.0, np.random.default_rng(0))
    np.testing.assert_array_equal(q.position, x)
    np.testing.assert_array_equal(q.velocity, 0)

    p = Particle(np.array([0.5, 0.95]), np.array([0.1, 0.1]), np.array([0.2, 0.2]))
    q = pso.update_particle(p, np.zeros(2), 1.0, 0.0, 0.0, np.random.default_rng(0))
    np.testing.assert_allclose(q.position, [0.6, 1.0])

    p = Particle(np.full(2, 0.5), np.zeros(2), np.ones(2))
    q = pso.update_particle(p, np.zeros(2), 0.0, 2.0, 2.0, Ones())
    np.testing.assert_array_equal(q.velocity, 0)
    np.testing.assert_array_equal(q.position, 0.5)


def test_update_consumes_two_d_uniforms():
    d = 7
    rng = np.random.default_rng(11)
    p = Particle(np.full(d, 0.5), np.zeros(d), np.full(d, 0.2))
    pso.update_particle(p, np.full(d, 0.8), 0.5, 1.0, 1.0, rng)
    ref = np.random.default_rng(11)
    ref.random(2 * d)
    assert rng.random() == ref.random()
    with pytest.raises(ValueError):
        pso.update_particle(p, np.zeros(d + 1), 0.5, 1.0, 1.0, rng)


@given(arrays(float, 5, elements=unit), arrays(float, 5, elements=st.floats(-2, 2)),
       arrays(float, 5, elements=unit), arrays(float, 5, elements=unit), st.integers(0, 2**32))
def test_update_keeps_positions_in_bounds(x, v, pb, gb, seed):
    q = pso.update_particle(Particle(x, v, pb), gb, 0.9, 2.5, 2.5, np.random.default_rng(seed))
    assert np.all((q.position >= 0) & (q.position <= 1))


# --- full optimization ------------------------------------------------------------

@pytest.fixture(scope="module")
def synthetic_run():
    t = predictive_table()
    train, test = t.rows(np.arange(0, 120, 2)), t.rows(np.arange(1, 120, 2))
    cfg = SwarmConfig(population=10, max_iterations=10, seed=3)
    return t, optimize(train, test, ModelSpec("nearest_centroid"), cfg), cfg


def test_predictive_feature_found(synthetic_run):
    _, r, cfg = synthetic_run
    assert r.gbest_mask[0]
    assert r.best_accuracy == 1.0
    assert r.gbest_fitness == pytest.approx(fitness(1.0, int(r.gbest_mask.sum()), 10, 0.8, 0.2), abs=1e-12)
    if r.gbest_mask.sum() == 3:
        assert r.gbest_fitness == pytest.approx(0.06, abs=1e-12)


def test_result_invariants(synthetic_run):
    _, r, cfg = synthetic_run
    h = np.array(r.fitness_history)
    assert len(h) == cfg.max_iterations
    assert np.all(np.diff(h) <= 0)
    assert h[-1] == r.gbest_fitness
    assert cfg.k_min <= r.gbest_mask.sum() <= cfg.k_max
    assert np.all((r.gbest_position >= 0) & (r.gbest_position <= 1))
    assert r.evaluations == cfg.population * cfg.max_iterations == len(r.evaluated_sizes)
    assert r.unique_fits <= r.evaluations
    assert min(r.evaluated_sizes) >= cfg.k_min and max(r.evaluated_sizes) <= cfg.k_max


def test_mutual_information_beats_random_masks(synthetic_run):
    t, r, _ = synthetic_run
    rng = np.random.default_rng(0)
    k = int(r.gbest_mask.sum())
    ours = mutual_information(r.gbest_mask, t)
    wins = 0
    for _ in range(20):
        mask = np.zeros(t.d, bool)
        mask[rng.choice(t.d, k, replace=False)] = True
        wins += ours > mutual_information(mask, t)
    assert wins > 10


def test_seed_determinism():
    t = predictive_table(seed=1)
    train, test = t.rows(np.arange(0, 120, 2)), t.rows(np.arange(1, 120, 2))
    cfg = SwarmConfig(population=2, max_iterations=1, seed=99)
    a = optimize(train, test, ModelSpec("knn"), cfg)
    b = optimize(train, test, ModelSpec("knn"), cfg)
    assert a.to_dict(train.feature_names) == b.to_dict(train.feature_names)
    c = optimize(train, test, ModelSpec("knn"), SwarmConfig(population=2, max_iterations=1, seed=100))
    assert not np.array_equal(a.gbest_position, c.gbest_position)


def test_k_max_above_d_means_no_cap():
    t = predictive_table()
    r = optimize(t, t, ModelSpec("gaussian_nb"), SwarmConfig(population=3, max_iterations=2, k_max=50))
    assert max(r.evaluated_sizes) <= t.d


def test_wdbc_masks_respect_bounds(wdbc_split):
    cfg = SwarmConfig(population=20, max_iterations=5, seed=1)
    r = optimize(wdbc_split.train, wdbc_split.test, ModelSpec("gaussian_nb"), cfg)
    assert 3 <= min(r.evaluated_sizes) and max(r.evaluated_sizes) <= 12


def test_validation_mode_never_reads_test_labels():
    t = predictive_table(seed=2)
    train, test = t.rows(np.arange(0, 120, 2)), t.rows(np.arange(1, 120, 2))
    flipped = DataTable(test.feature_names, test.X, 1 - test.y)
    cfg = SwarmConfig(population=4, max_iterations=3, seed=5, fitness_eval_mode="validation_split")
    a = optimize(train, test, ModelSpec("gaussian_nb"), cfg)
    b = optimize(train, flipped, ModelSpec("gaussian_nb"), cfg)
    assert a.to_dict() == b.to_dict()
    paper_cfg = SwarmConfig(population=4, max_iterations=3, seed=5)
    honest = optimize(train, test, ModelSpec("gaussian_nb"), paper_cfg)
    fooled = optimize(train, flipped, ModelSpec("gaussian_nb"), paper_cfg)
    assert honest.to_dict() != fooled.to_dict()


def test_fit_failure_reports_context():
    t = predictive_table()
    neg = DataTable(t.feature_names, t.X - 5.0, t.y)
    with pytest.raises(ModelError, match="iteration 1, particle 0"):
        optimize(neg, neg, ModelSpec("multinomial_nb"), SwarmConfig(population=2, max_iterations=1))


def test_optimize_preconditions():
    t = predictive_table()
    with pytest.raises(DataError):
        optimize(t, t.columns(np.arange(5)), ModelSpec("knn"), SwarmConfig())
    with pytest.raises(ConfigError):
        optimize(t.columns(np.arange(2)), t.columns(np.arange(2)), ModelSpec("knn"), SwarmConfig())
    one_class = t.rows(np.flatnonzero(t.y == 0))
    with pytest.raises(DataError):
        optimize(one_class, t, ModelSpec("knn"), SwarmConfig(k_max=10))


# --- mutual information ------------------------------------------------------------

def test_mutual_information_examples():
    y = np.repeat([0, 1], 50)
    t = DataTable(("same", "const"), np.column_stack([y.astype(float), np.ones(100)]), y)
    assert mutual_information(np.array([True, False]), t, bins=2) == pytest.approx(1.0, abs=1e-12)
    assert mutual_information(np.array([False, True]), t, bins=2) == 0.0
    assert pso.mutual_information_counts([[25, 25], [25, 25]]) == 0.0
    assert pso.mutual_information_counts([[50, 0], [0, 50]]) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        mutual_information(np.array([False, False]), t)
    with pytest.raises(ValueError):
        mutual_information(np.array([True, False]), t, bins=1)


@given(arrays(np.int64, (4, 2), elements=st.integers(0, 50)))
def test_mutual_information_bounds(counts):
    if counts.sum() == 0:
        return
    mi = pso.mutual_information_counts(counts)
    assert -1e-12 <= mi <= 1.0 + 1e-12
