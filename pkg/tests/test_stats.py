import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swarmfs import stats
from swarmfs.errors import DataError, DegenerateError

integrate = pytest.importorskip("scipy.integrate")


def t_density(x, df):
    logc = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(logc - (df + 1) / 2 * math.log1p(x * x / df))


def t_cdf_by_quadrature(t, df):
    # 0.5 plus the integral from 0 to |t|, reflected for negative t
    half, _ = integrate.quad(t_density, 0.0, abs(t), args=(df,), epsabs=1e-13, epsrel=1e-13, limit=200)
    return 0.5 + half if t >= 0 else 0.5 - half


def test_t_cdf_against_quadrature():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        df = int(rng.integers(1, 60))
        t = float(rng.normal() * rng.choice([0.5, 2.0, 6.0]))
        worst = max(worst, abs(stats.t_cdf(t, df) - t_cdf_by_quadrature(t, df)))
    assert worst <= 1e-8


def test_t_cdf_examples():
    for df in (1, 2, 7, 30):
        assert stats.t_cdf(0.0, df) == 0.5
    assert stats.t_two_tailed_p(2.776, 4) == pytest.approx(0.050, abs=0.001)
    assert stats.t_cdf(100.0, 5) == pytest.approx(1.0, abs=1e-8)
    # Cauchy has a closed form
    assert stats.t_cdf(1.0, 1) == pytest.approx(0.75, abs=1e-14)
    with pytest.raises(ValueError):
        stats.t_cdf(1.0, 0)


@given(st.floats(-50, 50), st.integers(1, 300))
def test_t_cdf_symmetry(t, df):
    assert stats.t_cdf(-t, df) == pytest.approx(1.0 - stats.t_cdf(t, df), abs=1e-12)


@given(st.floats(0, 20), st.floats(0, 20), st.integers(1, 100))
def test_p_value_monotone(t1, t2, df):
    if abs(t1 - t2) < 1e-6:
        return
    lo, hi = sorted((t1, t2))
    p_lo, p_hi = stats.t_two_tailed_p(lo, df), stats.t_two_tailed_p(hi, df)
    assert p_lo >= p_hi
    if p_hi > 1e-300:
        assert p_lo > p_hi


def test_incomplete_functions_against_closed_forms():
    # I_x(1, 1) = x, I_x(a, 1) = x^a, Q(1, x) = exp(-x), Q(1/2, x) = erfc(sqrt(x))
    for x in (0.0, 0.1, 0.5, 0.93, 1.0):
        assert stats.betainc(1, 1, x) == pytest.approx(x, abs=1e-14)
        assert stats.betainc(3.5, 1, x) == pytest.approx(x ** 3.5, abs=1e-14)
    for x in (0.0, 0.3, 1.0, 4.0, 25.0):
        assert stats.gammainc_upper(1.0, x) == pytest.approx(math.exp(-x), rel=1e-12, abs=1e-300)
        assert stats.gammainc_upper(0.5, x) == pytest.approx(math.erfc(math.sqrt(x)), rel=1e-12, abs=1e-300)


def test_paired_t_examples():
    r = stats.paired_t_test([1, 2, 3], [2, 1, 3])
    assert (r.t_statistic, r.p_value) == (0.0, 1.0)
    # diffs 1, 2, 3: mean 2, sd 1
    r = stats.paired_t_test([2, 4, 6], [1, 2, 3])
    assert r.t_statistic == pytest.approx(2 * math.sqrt(3), abs=1e-12)
    assert r.degrees_of_freedom == 2
    with pytest.raises(DegenerateError):
        stats.paired_t_test([1, 2, 3], [1, 2, 3])
    with pytest.raises(DataError):
        stats.paired_t_test([1], [2])
    with pytest.raises(DataError):
        stats.paired_t_test([1, 2], [1, 2, 3])


def test_paired_t_matches_scipy():
    sst = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.normal(size=12), rng.normal(size=12)
        ref = sst.ttest_rel(a, b)
        r = stats.paired_t_test(a, b)
        assert r.t_statistic == pytest.approx(ref.statistic, rel=1e-12)
        assert r.p_value == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-14)


vectors = arrays(float, 6, elements=st.floats(-100, 100))


@given(vectors, vectors, st.floats(0.01, 100))
def test_paired_t_antisymmetry_and_scale(a, b, c):
    diff = a - b
    if np.ptp(diff) < 1e-6 * max(1.0, np.abs(diff).max()):
        return
    r = stats.paired_t_test(a, b)
    s = stats.paired_t_test(b, a)
    assert s.t_statistic == pytest.approx(-r.t_statistic, rel=1e-9, abs=1e-12)
    assert s.p_value == pytest.approx(r.p_value, rel=1e-9, abs=1e-12)
    scaled = stats.paired_t_test(c * a, c * b)
    assert scaled.t_statistic == pytest.approx(r.t_statistic, rel=1e-6, abs=1e-9)
    assert scaled.p_value == pytest.approx(r.p_value, rel=1e-6, abs=1e-9)
    d, ds = stats.cohens_d(a, b), stats.cohens_d(c * a, c * b)
    assert ds.d_paired == pytest.approx(d.d_paired, rel=1e-6, abs=1e-9)
    if not math.isnan(d.d_pooled):
        assert ds.d_pooled == pytest.approx(d.d_pooled, rel=1e-6, abs=1e-9)


def test_cohens_d_examples():
    e = stats.cohens_d([2, 4, 6], [1, 2, 3])
    assert e.d_paired == pytest.approx(2.0, abs=1e-15)
    b = np.array([1.0, 3.0, 2.0, 5.0])
    e = stats.cohens_d(b + 2.0, b)
    assert "d_paired" in e.degenerate and math.isnan(e.d_paired)
    assert e.d_pooled == pytest.approx(2.0 / b.std(ddof=1), abs=1e-12)
    assert stats.cohens_d(b, b).d_pooled == 0.0


def test_pairwise_examples():
    same = stats.pairwise_t_tests({"a": [0.9, 0.95, 0.97], "b": [0.9, 0.95, 0.97]})
    assert len(same) == 1
    assert (same[0]["result"].t_statistic, same[0]["result"].p_value) == (0.0, 1.0)
    rng = np.random.default_rng(0)
    five = {name: rng.random(10) for name in "edcba"}
    out = stats.pairwise_t_tests(five)
    assert len(out) == 10
    assert (out[0]["model_a"], out[0]["model_b"]) == ("a", "b")
    with pytest.raises(DataError):
        stats.pairwise_t_tests({"a": [1, 2, 3], "b": [1, 2]})
    gap = stats.pairwise_t_tests({"a": [1.0, 2.0], "b": [0.0, 1.0]})
    assert gap[0]["result"] is None


def test_pairwise_engineered_gap():
    base = np.array([0.91, 0.95, 0.93, 0.97, 0.92, 0.96])
    diff = np.array([0.01, 0.03, 0.02, 0.04, 0.00, 0.02])
    r = stats.pairwise_t_tests({"m1": base + diff, "m2": base})[0]["result"]
    expected = diff.mean() / (diff.std(ddof=1) / math.sqrt(6))
    assert r.t_statistic == pytest.approx(expected, abs=1e-9)


def test_chi_square_examples():
    r = stats.chi_square_independence([[10, 0], [0, 10]])
    assert r.chi2 == 20.0 and r.df == 1
    assert r.p_value == pytest.approx(math.erfc(math.sqrt(10.0)), rel=1e-12)
    r = stats.chi_square_independence([[5, 5], [5, 5]])
    assert (r.chi2, r.p_value) == (0.0, 1.0)
    with pytest.raises(DataError):
        stats.chi_square_independence([[0, 0], [5, 5]])
    with pytest.raises(DataError):
        stats.chi_square_independence([[1, 2, 3], [4, 5, 6]])


@given(arrays(np.int64, (2, 2), elements=st.integers(0, 500)))
def test_chi_square_bounds(table):
    if np.any(table.sum(axis=0) == 0) or np.any(table.sum(axis=1) == 0):
        return
    r = stats.chi_square_independence(table)
    assert r.chi2 >= 0 and 0.0 <= r.p_value <= 1.0


def test_special_functions_match_scipy():
    special = pytest.importorskip("scipy.special")
    sst = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b = rng.uniform(0.1, 40.0, size=2)
        x = float(rng.random())
        assert stats.betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-12)
        s = float(rng.uniform(0.0, 60.0))
        assert stats.gammainc_upper(a, s) == pytest.approx(special.gammaincc(a, s), abs=1e-12)
        df = int(rng.integers(1, 10))
        assert stats.chi2_sf(s, df) == pytest.approx(sst.chi2.sf(s, df), abs=1e-12)
