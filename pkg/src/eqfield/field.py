"""Exact sampling of the sparse equicorrelated Gaussian field and its maximum.

The field lives on pairs 1 <= i < j <= n with unit variances, correlation r
between pairs sharing one index and 0 between disjoint pairs.  It is realized
through the latent representation

    G_ij = sqrt(r) (X_i + X_j) + sqrt(1 - 2r) Y_ij

with X_1..X_n and Y_ij independent standard normals.  The maximum is sampled
with O(n) memory: the Y_ij are streamed in lexicographic (i, j) order and
never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri_exp

from .errors import DomainError, FactorizationError, SizeError
from .normalizers import clamp_r, norm_constants
from .streams import Stream

#: Largest n for which the full field may be materialized.
DENSE_CAP = 64

#: Largest pair-count for the explicit-covariance sampler (n <= 64).
GRAPHICAL_CAP = DENSE_CAP * (DENSE_CAP - 1) // 2

# Pair values are produced in blocks of roughly this many entries.
_CHUNK = 1 << 21

#: Centering conventions for the standardized maximum.
CENTERING_MODES = ("gumbel", "critical")


@dataclass(frozen=True)
class FieldParams:
    """Field size n >= 2 and correlation r in [0, 1/2]."""

    n: int
    r: float

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"n={self.n} must be >= 2")
        object.__setattr__(self, "r", clamp_r(self.r))

    @property
    def pair_count(self) -> int:
        return self.n * (self.n - 1) // 2


def _pair_values(x: np.ndarray, y: np.ndarray, lo: int, hi: int,
                 sr: float, f: float) -> np.ndarray:
    """Field values for all pairs with first index in [lo, hi), in order."""
    n = x.size
    sums = np.concatenate([x[i] + x[i + 1:] for i in range(lo, hi)])
    return sr * sums + f * y


def _row_blocks(n: int):
    """Partition rows 0..n-2 into blocks of at most ~_CHUNK pair entries."""
    lo = 0
    while lo < n - 1:
        hi = lo
        count = 0
        while hi < n - 1 and count + (n - 1 - hi) <= _CHUNK:
            count += n - 1 - hi
            hi += 1
        if hi == lo:  # single row larger than the chunk; take it whole
            hi = lo + 1
            count = n - 1 - lo
        yield lo, hi, count
        lo = hi


def sample_max(params: FieldParams, stream: Stream) -> float:
    """One draw of max_{i<j} G_ij.

    Memory O(n), time O(n^2).  The degenerate case r = 1/2 reduces to the sum
    of the two largest latent X values over sqrt(2); the independent case
    r = 0 with n above the dense cap is drawn as the maximum of
    n(n-1)/2 iid normals through a single inverse-CDF evaluation.
    """
    n, r = params.n, params.r
    sr = math.sqrt(r)
    f = math.sqrt(1.0 - 2.0 * r)
    if f == 0.0:
        x = stream.normals(n)
        top = np.partition(x, n - 2)[n - 2:]
        return float(sr * (top[0] + top[1]))
    if r == 0.0 and n > DENSE_CAP:
        m = params.pair_count
        u = stream.uniforms(1)[0]
        return float(ndtri_exp(math.log(u) / m))
    x = stream.normals(n)
    best = -math.inf
    for lo, hi, count in _row_blocks(n):
        y = stream.normals(count)
        vals = _pair_values(x, y, lo, hi, sr, f)
        best = max(best, float(vals.max()))
    return best


def sample_field_dense(params: FieldParams, stream: Stream) -> np.ndarray:
    """A full field realization as a symmetric n x n matrix (zero diagonal).

    Consumes the stream exactly as `sample_max` does for the same parameters,
    so the dense maximum reproduces the streamed maximum draw for draw.
    """
    n, r = params.n, params.r
    if n > DENSE_CAP:
        raise SizeError(f"n={n} exceeds dense cap {DENSE_CAP}")
    sr = math.sqrt(r)
    f = math.sqrt(1.0 - 2.0 * r)
    x = stream.normals(n)
    g = np.zeros((n, n))
    if f == 0.0:
        y = np.zeros(params.pair_count)
    else:
        y = stream.normals(params.pair_count)
    pos = 0
    for i in range(n - 1):
        row = sr * (x[i] + x[i + 1:]) + f * y[pos:pos + n - 1 - i]
        g[i, i + 1:] = row
        g[i + 1:, i] = row
        pos += n - 1 - i
    return g


def standardize_value(value: float, n: int, mode: str) -> float:
    """Affine standardization of a maximum value under the two centerings.

    mode "gumbel":   sqrt(2) c_n (value - sqrt(2) c_n + log(4 sqrt(pi) c_n) / (sqrt(2) c_n))
    mode "critical": c_n (value - sqrt(2) d_n)
    """
    nc = norm_constants(n, 0.0)
    if mode == "gumbel":
        c = nc.c
        return math.sqrt(2.0) * c * (value - math.sqrt(2.0) * c
                                     + math.log(4.0 * math.sqrt(math.pi) * c)
                                     / (math.sqrt(2.0) * c))
    if mode == "critical":
        return nc.c * (value - math.sqrt(2.0) * nc.d)
    raise DomainError(f"unknown centering mode {mode!r}; expected one of {CENTERING_MODES}")


def standardized_max(params: FieldParams, mode: str, stream: Stream) -> float:
    """One standardized draw of the field maximum."""
    if params.n < 3:
        raise DomainError("standardization requires n >= 3")
    return standardize_value(sample_max(params, stream), params.n, mode)


def _cholesky_lower(a: np.ndarray) -> np.ndarray:
    """Dense lower-triangular factorization with pivot reporting."""
    a = np.array(a, dtype=float)
    d = a.shape[0]
    for k in range(d):
        pivot = a[k, k]
        if pivot <= 0.0 or not math.isfinite(pivot):
            raise FactorizationError(k, pivot)
        root = math.sqrt(pivot)
        a[k, k] = root
        a[k + 1:, k] /= root
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k + 1:, k])
        a[k, k + 1:] = 0.0
    return a


def sample_max_graphical(n: int, covariance, stream: Stream) -> float:
    """Maximum of a centered Gaussian pair field with the given covariance.

    `covariance` is either a scalar r (constant-correlation structure,
    identical in law to `sample_max`) or an explicit symmetric PSD matrix of
    size n(n-1)/2 with unit diagonal.
    """
    if np.isscalar(covariance):
        return sample_max(FieldParams(n=n, r=float(covariance)), stream)
    a = np.asarray(covariance, dtype=float)
    d = n * (n - 1) // 2
    if a.shape != (d, d):
        raise DomainError(f"covariance shape {a.shape} does not match {d} pairs")
    if d > GRAPHICAL_CAP:
        raise SizeError(f"pair count {d} exceeds cap {GRAPHICAL_CAP}")
    if not np.allclose(a, a.T, atol=1e-12):
        raise DomainError("covariance matrix is not symmetric")
    if not np.allclose(np.diag(a), 1.0, atol=1e-12):
        raise DomainError("covariance matrix must have unit diagonal")
    low = _cholesky_lower(a)
    z = stream.normals(d)
    return float(np.max(low @ z))
