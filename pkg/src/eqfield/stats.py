"""Empirical-distribution utilities: ECDF, Kolmogorov-Smirnov statistics,
Monte Carlo summaries.

No p-values are attached to the KS statistics; experiments compare the
statistic against fixed tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


class EcdfSummary:
    """Empirical CDF of a sample, evaluated right-continuously."""

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise DomainError("empty sample")
        self.values = np.sort(values)
        self.count = int(values.size)

    def __call__(self, x):
        # #{values <= x} / count
        return np.searchsorted(self.values, x, side="right") / self.count


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n1: int
    n2: int | None
    location: float


def ks_one_sample(sample, cdf) -> KsResult:
    """Sup-norm distance between the sample ECDF and a reference CDF.

    `cdf` may be scalar or vectorized; it must be monotone.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    m = x.size
    if m == 0:
        raise DomainError("empty sample")
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except TypeError:
        f = np.array([cdf(v) for v in x], dtype=float)
    i = np.arange(1, m + 1)
    d_plus = i / m - f
    d_minus = f - (i - 1) / m
    d = np.maximum(d_plus, d_minus)
    k = int(np.argmax(d))
    return KsResult(statistic=float(d[k]), n1=m, n2=None, location=float(x[k]))


def ks_two_sample(a, b) -> KsResult:
    """Sup-norm distance between two sample ECDFs via a merge scan."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("empty sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = np.abs(fa - fb)
    k = int(np.argmax(d))
    return KsResult(statistic=float(d[k]), n1=int(a.size), n2=int(b.size),
                    location=float(grid[k]))


@dataclass(frozen=True)
class McSummary:
    mean: float
    variance: float
    stderr: float
    count: int


def mc_summary(samples) -> McSummary:
    """Mean, unbiased variance and standard error, order-insensitive.

    Sums are computed with exact compensated summation so permuting the
    sample cannot move the result by more than representation error.
    """
    xs = [float(v) for v in np.asarray(samples, dtype=float).ravel()]
    m = len(xs)
    if m < 2:
        raise DomainError("need at least 2 samples")
    mean = math.fsum(xs) / m
    var = math.fsum((v - mean) ** 2 for v in xs) / (m - 1)
    return McSummary(mean=mean, variance=var, stderr=math.sqrt(var / m), count=m)
