"""Significance tests: paired t, Cohen's d, pairwise model comparisons, 2x2 chi-square.

p-values come from regularized incomplete beta and gamma functions
evaluated by continued fractions (modified Lentz) and power series.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from swarmfs.errors import DataError, DegenerateError

EPS = 1e-15
TINY = 1e-300
MAX_ITER = 10_000
ALPHA = 0.05


def _betacf(a, b, x):
    """Continued fraction for I_x(a, b), modified Lentz."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a, b, x):
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return float(x)
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the fraction converges fast on the side x < (a+1)/(a+b+2); use symmetry otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x)."""
    if a <= 0:
        raise ValueError("gammainc needs a > 0")
    if x < 0:
        raise ValueError("gammainc needs x >= 0")
    if x == 0:
        return 1.0
    log_front = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # series for P(a, x)
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * EPS:
                return 1.0 - total * math.exp(log_front)
        raise ArithmeticError(f"gamma series did not converge for a={a}, x={x}")
    # continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return math.exp(log_front) * h
    raise ArithmeticError(f"gamma fraction did not converge for a={a}, x={x}")


def t_cdf(t, df):
    """Student-t CDF with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    t = float(t)
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    return 1.0 - tail if t > 0 else tail


def t_two_tailed_p(t, df):
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    t = float(t)
    if math.isinf(t):
        return 0.0
    return min(1.0, max(0.0, betainc(df / 2.0, 0.5, df / (df + t * t))))


def chi2_sf(x, df):
    return gammainc_upper(df / 2.0, x / 2.0)


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: int
    p_value: float
    two_tailed: bool = True

    @property
    def significant(self):
        return self.p_value < ALPHA

    def to_dict(self):
        return {
            "t_statistic": self.t_statistic,
            "degrees_of_freedom": self.degrees_of_freedom,
            "p_value": self.p_value,
            "two_tailed": self.two_tailed,
            "interpretation": interpret(self.p_value),
        }


@dataclass(frozen=True)
class EffectSize:
    d_paired: float
    d_pooled: float
    degenerate: tuple = ()

    def to_dict(self):
        return {"d_paired": self.d_paired, "d_pooled": self.d_pooled, "degenerate": list(self.degenerate)}


def interpret(p):
    return f"significant at alpha={ALPHA}" if p < ALPHA else f"not significant at alpha={ALPHA}"


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape:
        raise DataError(f"paired samples must be equal-length vectors, got {a.shape} and {b.shape}")
    if a.shape[0] < 2:
        raise DataError("paired samples need at least 2 observations")
    return a, b


def paired_t_test(a, b):
    """Two-tailed paired t-test on a - b. Raises DegenerateError when every difference is equal."""
    a, b = _pair(a, b)
    diff = a - b
    n = diff.shape[0]
    mean = float(diff.mean())
    sd = float(diff.std(ddof=1))
    if sd == 0.0 or np.all(diff == diff[0]):
        raise DegenerateError("differences have zero variance; t is undefined")
    t = mean / (sd / math.sqrt(n))
    return TTestResult(t, n - 1, t_two_tailed_p(t, n - 1))


def cohens_d(a, b):
    """Paired and pooled standardized mean differences; a zero denominator gives nan and a flag."""
    a, b = _pair(a, b)
    diff = a - b
    flags = []
    sd_diff = float(diff.std(ddof=1))
    if sd_diff == 0.0 or np.all(diff == diff[0]):
        flags.append("d_paired")
        d_paired = float("nan")
    else:
        d_paired = float(diff.mean()) / sd_diff
    na = nb = a.shape[0]
    pooled = math.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2))
    gap = float(a.mean() - b.mean())
    if pooled == 0.0:
        if gap == 0.0:
            d_pooled = 0.0
        else:
            flags.append("d_pooled")
            d_pooled = float("nan")
    else:
        d_pooled = gap / pooled
    return EffectSize(d_paired, d_pooled, tuple(flags))


def pairwise_t_tests(model_scores):
    """Paired t-test for every unordered pair of models, in name order.

    A pair whose fold differences are all equal has no variance to test
    against; if those differences are all zero the models are
    indistinguishable and the result is t=0, p=1. Any other constant gap is
    reported as a degenerate entry with no statistic.
    """
    names = sorted(model_scores)
    lengths = {len(model_scores[n]) for n in names}
    if len(lengths) > 1:
        raise DataError(f"models were scored on different numbers of folds: {sorted(lengths)}")
    out = []
    for first, second in itertools.combinations(names, 2):
        a = np.asarray(model_scores[first], dtype=float)
        b = np.asarray(model_scores[second], dtype=float)
        entry = {"model_a": first, "model_b": second}
        try:
            entry["result"] = paired_t_test(a, b)
        except DegenerateError:
            if np.all(a == b):
                entry["result"] = TTestResult(0.0, a.shape[0] - 1, 1.0)
            else:
                entry["result"] = None
                entry["degenerate"] = "constant nonzero difference"
        out.append(entry)
    return out


@dataclass(frozen=True)
class ChiSquareResult:
    chi2: float
    df: int
    p_value: float

    def to_dict(self):
        return {"chi2": self.chi2, "df": self.df, "p_value": self.p_value, "interpretation": interpret(self.p_value)}


def chi_square_independence(table):
    """Pearson chi-square on a 2x2 count table, no continuity correction."""
    O = np.asarray(table, dtype=float)
    if O.shape != (2, 2):
        raise DataError(f"expected a 2x2 table, got shape {O.shape}")
    if np.any(O < 0):
        raise DataError("counts must be non-negative")
    rows = O.sum(axis=1)
    cols = O.sum(axis=0)
    if np.any(rows == 0) or np.any(cols == 0):
        raise DataError("a row or column of the table sums to zero")
    E = np.outer(rows, cols) / O.sum()
    chi2 = float(np.sum((O - E) ** 2 / E))
    return ChiSquareResult(chi2, 1, min(1.0, max(0.0, chi2_sf(chi2, 1))))
