"""Paired significance tests over per-fold accuracies.

The Wilcoxon signed-rank test drops zero differences, ranks the absolute
differences (average ranks on ties), sums ranks by sign into W+ and W-, and
takes W = min(W+, W-). For small samples the p-value is exact: the null
distribution of W+ is enumerated over all 2^n sign assignments (computed by
subset-sum counting, which is the same distribution). Larger samples fall
back to a normal approximation with continuity and tie corrections.

The paired t-test uses a hand-rolled Student-t CDF via the continued-fraction
regularized incomplete beta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    AllZeroDifferencesError,
    TooFewPairsError,
    ZeroVarianceError,
)

EXACT_ENUMERATION_LIMIT = 25

DIRECTIONS = ("enhanced_greater", "base_greater")


@dataclass(frozen=True)
class PairedSample:
    """Per-fold metric values of a baseline and a comparison model."""

    base: tuple[float, ...]
    enhanced: tuple[float, ...]

    def __post_init__(self):
        if len(self.base) != len(self.enhanced):
            raise ValueError(
                f"paired sample lengths differ: {len(self.base)} vs {len(self.enhanced)}"
            )

    @property
    def k(self) -> int:
        return len(self.base)

    def differences(self) -> list[float]:
        return [e - b for b, e in zip(self.base, self.enhanced)]


@dataclass(frozen=True)
class WilcoxonResult:
    w_plus: float
    w_minus: float
    w_statistic: float
    n_effective: int
    p_value: float  # two-sided
    p_one_sided: float  # alternative: positive shift (enhanced > base)
    alpha: float
    method: str  # "exact" or "normal_approximation"

    @property
    def significant(self) -> bool:
        return self.p_value <= self.alpha


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: int
    p_one_sided: float
    direction: str


def wilcoxon_signed_rank(sample: PairedSample, alpha: float = 0.05) -> WilcoxonResult:
    """Signed-rank test on paired differences enhanced - base."""
    if sample.k < 2:
        raise TooFewPairsError(f"need at least 2 pairs, got {sample.k}")
    diffs = [d for d in sample.differences() if d != 0.0]
    if not diffs:
        raise AllZeroDifferencesError("all paired differences are zero")
    n = len(diffs)
    ranks = _average_ranks([abs(d) for d in diffs])
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    w = min(w_plus, w_minus)
    if n <= EXACT_ENUMERATION_LIMIT:
        p_two, p_one = _exact_p_values(ranks, w_plus)
        method = "exact"
    else:
        p_two, p_one = _normal_p_values(ranks, w, w_minus)
        method = "normal_approximation"
    return WilcoxonResult(
        w_plus=w_plus,
        w_minus=w_minus,
        w_statistic=w,
        n_effective=n,
        p_value=p_two,
        p_one_sided=p_one,
        alpha=alpha,
        method=method,
    )


def _average_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _exact_p_values(ranks: list[float], w_plus: float) -> tuple[float, float]:
    # Doubling makes tied (half-integer) ranks integral, so subset sums can
    # be counted exactly with integer arithmetic.
    scaled = [int(round(2.0 * r)) for r in ranks]
    total = sum(scaled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for s in scaled:
        for v in range(total, s - 1, -1):
            counts[v] += counts[v - s]
    denom = 2 ** len(ranks)
    w2 = int(round(2.0 * w_plus))
    p_le = sum(counts[: w2 + 1]) / denom
    p_ge = sum(counts[w2:]) / denom
    p_two = min(1.0, 2.0 * min(p_le, p_ge))
    return p_two, p_ge


def _normal_p_values(ranks: list[float], w: float, w_minus: float) -> tuple[float, float]:
    n = len(ranks)
    mu = n * (n + 1) / 4.0
    tie_sizes = _tie_sizes(ranks)
    sigma2 = n * (n + 1) * (2 * n + 1) / 24.0 - sum(t**3 - t for t in tie_sizes) / 48.0
    sigma = math.sqrt(sigma2)
    z_two = (w - mu + 0.5) / sigma
    p_two = min(1.0, 2.0 * _norm_cdf(z_two))
    z_one = (w_minus - mu + 0.5) / sigma
    return p_two, _norm_cdf(z_one)


def _tie_sizes(ranks: list[float]) -> list[int]:
    from collections import Counter

    return [c for c in Counter(ranks).values() if c > 1]


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def paired_t_test(sample: PairedSample, direction: str = "enhanced_greater") -> TTestResult:
    """One-tailed paired t-test on differences enhanced - base.

    direction 'enhanced_greater' tests mean difference > 0;
    'base_greater' tests mean difference < 0.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if sample.k < 2:
        raise TooFewPairsError(f"need at least 2 pairs, got {sample.k}")
    diffs = sample.differences()
    n = len(diffs)
    mean = sum(diffs) / n
    ss = sum((d - mean) ** 2 for d in diffs)
    if ss == 0.0:
        raise ZeroVarianceError("paired differences have zero variance")
    sd = math.sqrt(ss / (n - 1))
    t = mean / (sd / math.sqrt(n))
    df = n - 1
    cdf = t_cdf(t, df)
    p = (1.0 - cdf) if direction == "enhanced_greater" else cdf
    return TTestResult(t_statistic=t, degrees_of_freedom=df, p_one_sided=p, direction=direction)


def t_cdf(t: float, df: int) -> float:
    """CDF of Student's t via the regularized incomplete beta."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    x = df / (df + t * t)
    tail = 0.5 * betainc_regularized(df / 2.0, 0.5, x)
    return 1.0 - tail if t >= 0 else tail


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) by Lentz continued fraction."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges quickly only below the split point
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def _beta_cf(a: float, b: float, x: float) -> float:
    max_iter = 300
    eps = 3e-15
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h
