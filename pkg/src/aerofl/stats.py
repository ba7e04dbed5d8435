"""Evaluation metrics and seed-sweep statistics.

Includes a self-contained Student-t tail probability built on the
continued-fraction regularized incomplete beta function, so the paired
t-test carries no statistics-library dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScoreBreakdown:
    total: float
    under_sum: float   # contributions from d < 0 (predicted early)
    over_sum: float    # contributions from d >= 0 (predicted late)
    under_count: int
    over_count: int


@dataclass(frozen=True)
class PairedTestResult:
    t: float
    p: float
    df: int
    mean_diff: float
    cohens_d: float
    degenerate: bool = False  # zero-variance differences


def mae(pred, truth) -> float:
    """Mean absolute error in cycles."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("pred and truth must be equal-length and non-empty")
    return float(np.abs(pred - truth).mean())


def nasa_score(pred, truth) -> ScoreBreakdown:
    """Asymmetric exponential score, summed over all windows.

    d = pred - truth; late predictions (d >= 0) cost exp(d/10) - 1,
    early ones cost exp(-d/13) - 1. Every term is nonnegative.
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("pred and truth must be equal-length and non-empty")
    d = pred - truth
    under = d < 0
    under_terms = np.expm1(-d[under] / 13.0)
    over_terms = np.expm1(d[~under] / 10.0)
    return ScoreBreakdown(
        total=float(under_terms.sum() + over_terms.sum()),
        under_sum=float(under_terms.sum()),
        over_sum=float(over_terms.sum()),
        under_count=int(under.sum()),
        over_count=int((~under).sum()),
    )


def mean_std(values) -> tuple[float, float]:
    """Mean and sample standard deviation (divisor n-1)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise ValueError("need at least 2 values for a sample std")
    return float(values.mean()), float(values.std(ddof=1))


def coefficient_of_variation(values) -> float:
    """100 * std / |mean|, the cross-seed instability indicator."""
    m, s = mean_std(values)
    if m == 0:
        raise ValueError("coefficient of variation undefined at zero mean")
    return 100.0 * s / abs(m)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    MAXIT, EPS, FPMIN = 300, 1e-15, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) to ~1e-14 relative accuracy for a, b > 0, x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, df: int) -> float:
    """P(|T| >= |t|) for T ~ Student-t(df)."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def paired_t_test(a, b) -> PairedTestResult:
    """Two-tailed paired t-test between matched seed vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.size < 2:
        raise ValueError("paired test needs two equal-length vectors, n >= 2")
    diff = a - b
    n = diff.size
    m, s = mean_std(diff)
    if s == 0.0:
        # Degenerate sweep: all differences identical.
        if m == 0.0:
            return PairedTestResult(0.0, 1.0, n - 1, 0.0, 0.0, degenerate=True)
        t = math.inf if m > 0 else -math.inf
        return PairedTestResult(t, 0.0, n - 1, m, math.copysign(math.inf, m),
                                degenerate=True)
    t = m / (s / math.sqrt(n))
    return PairedTestResult(
        t=t,
        p=student_t_two_tailed_p(t, n - 1),
        df=n - 1,
        mean_diff=m,
        cohens_d=m / s,
    )


def cohens_d_paired(a, b) -> float:
    """Paired effect size mean(a-b)/std(a-b); directional indicator only."""
    return paired_t_test(a, b).cohens_d
