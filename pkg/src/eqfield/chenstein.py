"""Poisson-approximation quantities for the field maximum exceedance count.

For threshold u_n(y) and latent truncation t_n, the single-pair exceedance
probability after truncation is

    p12 = P(G_12 > u_n, |X_1| v |X_2| < t_n)
        = int int_{[-t,t]^2} [1 - Phi((u - sqrt(r)(x1+x2)) / sqrt(1-2r))]
              phi(x1) phi(x2) dx1 dx2,

the expected exceedance count is n(n-1)/2 * p12 -> e^{-y}, the first
neighborhood term is b1 with the exact neighborhood count (each pair has
2(n-2) neighbors sharing an index, plus itself), and the pair-correlation
term decays with exponent g(r) = 2 (1 - sqrt(2r))^2 / (1 - r).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.integrate import IntegrationWarning, quad
from scipy.special import ndtr
from scipy.stats import norm

from .errors import DomainError, NumericError
from .normalizers import clamp_r, norm_constants, threshold_u

_PHI = norm.pdf


def p12(n: int, r: float, y: float, rtol: float = 1e-6) -> float:
    """Truncated single-pair exceedance probability by nested adaptive
    quadrature to relative tolerance rtol.

    At r = 1/2 the Gaussian tail factor degenerates to the indicator
    {sqrt(1/2)(x1+x2) > u} and the inner integral has a closed form.
    """
    if n < 3:
        raise DomainError(f"n={n} must be >= 3")
    r = clamp_r(r)
    nc = norm_constants(n, r)
    u = threshold_u(n, y)
    t = nc.t
    sr = math.sqrt(r)
    f = math.sqrt(max(1.0 - 2.0 * r, 0.0))

    if f > 0.0:
        def inner(x1: float) -> float:
            def g(x2: float) -> float:
                return ndtr(-(u - sr * (x1 + x2)) / f) * _PHI(x2)
            val, _ = quad(g, -t, t, epsabs=0.0, epsrel=rtol / 10.0, limit=200)
            return val * _PHI(x1)
    else:
        def inner(x1: float) -> float:
            lo = max(-t, u / sr - x1)
            if lo >= t:
                return 0.0
            return (ndtr(t) - ndtr(lo)) * _PHI(x1)

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(inner, -t, t, epsabs=0.0, epsrel=rtol, limit=200)
        except IntegrationWarning as exc:
            raise NumericError(f"quadrature did not converge: {exc}") from exc
    if val < 0.0:
        val = 0.0
    return val


def b1(n: int, p12_value: float) -> float:
    """First Chen-Stein neighborhood term with the exact pair count:
    b1 = [n(n-1)/2] * (2n-3) * p12^2."""
    if p12_value < 0.0:
        raise DomainError("p12 must be nonnegative")
    return (n * (n - 1) / 2.0) * (2.0 * n - 3.0) * p12_value ** 2


def g_exponent(r: float) -> float:
    """Decay exponent of the pair-correlation term, simplified form."""
    r = clamp_r(r)
    return 2.0 * (1.0 - math.sqrt(2.0 * r)) ** 2 / (1.0 - r)


def g_exponent_long(r: float) -> float:
    """The same exponent before algebraic simplification:
    4/(1+r) + (4 sqrt(r) - sqrt(2)(1+r))^2 / (2(1-r^2)) - 3."""
    r = clamp_r(r)
    return (4.0 / (1.0 + r)
            + (4.0 * math.sqrt(r) - math.sqrt(2.0) * (1.0 + r)) ** 2
            / (2.0 * (1.0 - r * r))
            - 3.0)


@dataclass(frozen=True)
class ChenSteinReport:
    n: int
    r: float
    y: float
    p12: float
    mean: float
    b1: float
    b2_exponent: float
    b2_bound_log: float
    total_error_bound: float
    alpha: float
    L: float


def report(n: int, r: float, y: float, slack: float) -> ChenSteinReport:
    """Assemble all approximation quantities at (n, r, y).

    slack is the user-chosen coefficient on log log n in the log bound for
    the pair-correlation term: b2_bound_log = -g(r) log n + slack log log n.
    """
    if slack < 0.0:
        raise DomainError(f"slack={slack} must be nonnegative")
    r = clamp_r(r)
    nc = norm_constants(n, r)
    u = threshold_u(n, y)
    p = p12(n, r, y)
    mean = n * (n - 1) / 2.0 * p
    g = g_exponent(r)
    b2_log = -g * math.log(n) + slack * math.log(math.log(n))
    sr = math.sqrt(r)
    f = math.sqrt(max(1.0 - 2.0 * r, 0.0))
    if f > 0.0:
        alpha = math.sqrt(r / (1.0 - 2.0 * r))
        ell = (u - 2.0 * sr * nc.t) / f
    else:
        alpha = math.inf
        num = u - 2.0 * sr * nc.t
        ell = math.copysign(math.inf, num) if num != 0.0 else 0.0
    return ChenSteinReport(n=n, r=r, y=y, p12=p, mean=mean, b1=b1(n, p),
                           b2_exponent=g, b2_bound_log=b2_log,
                           total_error_bound=b1(n, p) + math.exp(b2_log),
                           alpha=alpha, L=ell)


def joint_event_mc(n: int, r: float, y: float, reps: int, stream) -> float:
    """Monte Carlo sanity estimate of P(A_12 and A_13) where
    A_ij = {G_ij > u_n, |X_i| v |X_j| < t_n}.  Not used in any bound."""
    import numpy as np

    r = clamp_r(r)
    nc = norm_constants(n, r)
    u = threshold_u(n, y)
    sr = math.sqrt(r)
    f = math.sqrt(max(1.0 - 2.0 * r, 0.0))
    x = stream.normals(3 * reps).reshape(3, reps)
    yv = stream.normals(2 * reps).reshape(2, reps)
    g12 = sr * (x[0] + x[1]) + f * yv[0]
    g13 = sr * (x[0] + x[2]) + f * yv[1]
    ok = np.abs(x) < nc.t
    a12 = (g12 > u) & ok[0] & ok[1]
    a13 = (g13 > u) & ok[0] & ok[2]
    return float(np.mean(a12 & a13))
