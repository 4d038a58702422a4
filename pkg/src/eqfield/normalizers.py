"""Deterministic normalizing sequences and Gumbel-family limit laws.

Conventions: all logarithms are natural.  For a field of size n the basic
sequences are

    c_n = sqrt(2 log n)
    d_n = sqrt(2 log n) - (log log n + log 4*pi) / (2 sqrt(2 log n))
    t_n = sqrt(2 log n) + log log n / sqrt(log n)
    T_n = log log n
    f_n = 1 - 2 r

Quantities involving log log n require n >= 3; c_n alone is defined for
n >= 2 (see `sqrt_two_log`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

LOG_4PI = math.log(4.0 * math.pi)

# Relative slack for the clamp of r just above 1/2 produced by parameter maps.
R_CLAMP = 1e-12


def clamp_r(r: float) -> float:
    """Validate r in [0, 1/2], tolerating round-off within 1e-12 above 1/2."""
    if 0.0 <= r <= 0.5:
        return float(r)
    if 0.5 < r <= 0.5 + R_CLAMP:
        return 0.5
    raise DomainError(f"correlation parameter r={r!r} outside [0, 1/2]")


def sqrt_two_log(n: int) -> float:
    """c_n = sqrt(2 log n), defined for n >= 2."""
    if n < 2:
        raise DomainError(f"n={n} must be >= 2")
    return math.sqrt(2.0 * math.log(n))


@dataclass(frozen=True)
class NormConstants:
    """The scalar sequences attached to a field of size n with correlation r."""

    n: int
    c: float  # sqrt(2 log n)
    d: float  # second-order centering
    t: float  # latent truncation level
    T: float  # log log n
    f: float  # 1 - 2 r


def norm_constants(n: int, r: float) -> NormConstants:
    """All normalizing constants for field size n and correlation r.

    Requires n >= 3 so that log log n > 0.
    """
    if n < 3:
        raise DomainError(f"n={n} must be >= 3 (log log n must be positive)")
    r = clamp_r(r)
    logn = math.log(n)
    llogn = math.log(logn)
    c = math.sqrt(2.0 * logn)
    d = c - (llogn + LOG_4PI) / (2.0 * c)
    t = c + llogn / math.sqrt(logn)
    return NormConstants(n=n, c=c, d=d, t=t, T=llogn, f=1.0 - 2.0 * r)


def threshold_u(n: int, y: float) -> float:
    """Exceedance threshold u_n(y) = sqrt(2) c_n + (y - log(4 sqrt(pi) c_n)) / (sqrt(2) c_n)."""
    if n < 3:
        raise DomainError(f"n={n} must be >= 3")
    c = sqrt_two_log(n)
    return math.sqrt(2.0) * c + (y - math.log(4.0 * math.sqrt(math.pi) * c)) / (math.sqrt(2.0) * c)


@dataclass(frozen=True)
class GumbelLaw:
    """Gumbel law with CDF x -> exp(-mass * e^{-x})."""

    mass: float

    def __post_init__(self):
        if not self.mass > 0.0:
            raise DomainError(f"mass={self.mass} must be positive")


#: Standard Gumbel law, CDF exp(-e^{-x}).
STANDARD_GUMBEL = GumbelLaw(1.0)

#: The law arising for maxima of standardized sample coefficients.
G1 = GumbelLaw(1.0 / (4.0 * math.sqrt(2.0 * math.pi)))


def gumbel_cdf(x: float, law: GumbelLaw = STANDARD_GUMBEL) -> float:
    return math.exp(-law.mass * math.exp(-x))


def gumbel_quantile(alpha: float, law: GumbelLaw = STANDARD_GUMBEL) -> float:
    """The (1 - alpha)-quantile q, i.e. gumbel_cdf(q, law) = 1 - alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1)")
    return -math.log(-math.log1p(-alpha) / law.mass)


def gumbel_quantile_bisect(alpha: float, law: GumbelLaw = STANDARD_GUMBEL,
                           tol: float = 1e-14) -> float:
    """Quantile by bisection on the CDF; slow reference for the closed form."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1)")
    target = 1.0 - alpha
    lo, hi = -50.0, 50.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gumbel_cdf(mid, law) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gumbel_sample(law: GumbelLaw, stream, size: int):
    """Inverse-CDF draws: CDF(x) = u  =>  x = -log(-log(u) / mass)."""
    import numpy as np

    u = stream.uniforms(size)
    return -np.log(-np.log(u) / law.mass)
