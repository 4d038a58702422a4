"""Samplers and quantile machinery for the limit laws of the field maximum.

The extremal point process is realized as eta_i = -log(zeta_1 + ... + zeta_i)
with iid standard exponentials zeta_k.  In the critical scaling the limit of
the centered maximum is

    sup_{i<j} { (eta_i + eta_j)/sqrt(2) + c Z_ij } - lambda,    c = sqrt(2 lambda),

with Z_ij iid standard normal, and for lambda = 0 it collapses to
(eta_1 + eta_2)/sqrt(2).

Sampling the supremum needs a finite truncation K of the point process.
`truncation_budget` assembles the analytic tail constants (K1/K2/K3, the
quantile floors T_eps and v_eps) and certifies a practical K empirically by a
coupled doubling ladder; see the TruncationBudget docstring for which
components enter K_required.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr, ndtri, ndtri_exp

from .errors import ConfigError, DomainError
from .streams import Stream

SQRT2 = math.sqrt(2.0)

# Engine tuning: exact pair handling for the head of the point process,
# binned handling for the far tail.
_HEAD = 64
_BINW = 1.0 / 512.0

# Doubling ladder for the empirical truncation certificate.
_LADDER_START = 64
_LADDER_MAX = 1 << 16
_LADDER_REPS = 3000

# Fixed seed for the default budget pilot stream; budgets are pure functions
# of (epsilon, c) given this default.
_BUDGET_SEED = 0x00B0D6E7

_budget_cache: dict = {}


@dataclass(frozen=True)
class PppPoints:
    """Truncated realization of the intensity-e^{-x} Poisson point process."""

    points: np.ndarray  # strictly decreasing eta_1 > ... > eta_K
    K: int


def sample_ppp(K: int, stream: Stream) -> PppPoints:
    """K points via the partial-sum construction over iid exponentials."""
    if K < 1:
        raise DomainError(f"K={K} must be >= 1")
    zeta = stream.exponentials(K)
    eta = -np.log(np.cumsum(zeta))
    return PppPoints(points=eta, K=K)


def kl_divergence(p: float, q: float) -> float:
    """Bernoulli relative entropy D(p || q) with the 0 log 0 = 0 convention.

    q in {0, 1} with p != q yields +inf.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p} outside [0, 1]")
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q={q} outside [0, 1]")
    if q in (0.0, 1.0):
        return 0.0 if p == q else math.inf
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


# ---------------------------------------------------------------------------
# coupled per-bin uniforms

_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)


def _hash_uniforms(key: np.uint64, idx: np.ndarray) -> np.ndarray:
    """Uniform(0,1) variates as a pure function of (key, integer index).

    splitmix64 finalizer; used for the far-tail bins so that draws at
    truncation K and 2K share the noise of every common bin.
    """
    z = (np.uint64(key) + idx.astype(np.uint64) * _SM_GAMMA) + _SM_GAMMA
    z = (z ^ (z >> np.uint64(30))) * _SM_M1
    z = (z ^ (z >> np.uint64(27))) * _SM_M2
    z = z ^ (z >> np.uint64(31))
    u = (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
    return np.maximum(u, 1e-300)


def _perturbed_sup(a: np.ndarray, c: float, stream: Stream) -> float:
    """One draw of sup_{i<j} { a_i + a_j + c Z_ij } for descending a.

    Pairs among the first _HEAD points get exact independent normals.  All
    remaining pairs are binned on a grid of width _BINW (pair-sum error at
    most _BINW); each occupied bin contributes the maximum of its count of
    iid normals through a single inverse-CDF evaluation.  Pair-sum counts
    come from an FFT self-convolution of the bin histogram, which is exact
    integer arithmetic up to rounding of the transform.
    """
    K = a.size
    if c == 0.0:
        return float(a[0] + a[1])
    H = min(_HEAD, K)
    sums = np.concatenate([a[i] + a[i + 1:H] for i in range(H - 1)])
    z = stream.normals(sums.size)
    best = float(np.max(sums + c * z))
    if K <= H:
        return best

    w = _BINW
    b = np.rint((a[0] - a) / w).astype(np.int64)
    nb = int(b[-1]) + 1
    hist_all = np.bincount(b, minlength=nb).astype(np.float64)
    hist_head = np.bincount(b[:H], minlength=nb).astype(np.float64)
    npair_bins = 2 * nb - 1
    size = 1 << (npair_bins - 1).bit_length()
    fa = np.fft.rfft(hist_all, size)
    fh = np.fft.rfft(hist_head, size)
    conv = np.fft.irfft(fa * fa - fh * fh, size)[:npair_bins]
    counts = np.rint(conv).astype(np.int64)
    counts -= np.bincount(2 * b, minlength=npair_bins)
    counts += np.bincount(2 * b[:H], minlength=npair_bins)
    counts //= 2

    occ = np.nonzero(counts > 0)[0]
    if occ.size:
        key = stream._gen.integers(0, 2**64, dtype=np.uint64)
        u = _hash_uniforms(key, occ)
        zmax = ndtri_exp(np.log(u) / counts[occ])
        svals = 2.0 * a[0] - w * occ
        best = max(best, float(np.max(svals + c * zmax)))
    return best


# ---------------------------------------------------------------------------
# truncation budget

LOG10 = math.log(10.0)


def k1_tail_log(K: int, k_hi: int | None = None) -> float:
    """log of a certified upper bound on sum_{k >= K} exp(-(k/4) log k + 2k).

    The increments of the exponent t_k = 2k - (k/4) log k are decreasing, so
    beyond any point where they are negative the series is dominated by a
    geometric tail; terms up to that point are summed exactly in log space.
    """
    if K < 1:
        raise DomainError(f"K={K} must be >= 1")
    if k_hi is None:
        k_hi = max(2 * K, 8192)
    k = np.arange(K, k_hi + 1, dtype=np.float64)
    t = 2.0 * k - 0.25 * k * np.log(k)
    # geometric bound past k_hi
    delta = (2.0 * (k_hi + 1) - 0.25 * (k_hi + 1) * math.log(k_hi + 1.0)) - float(t[-1])
    while delta >= -1e-3:
        k_hi *= 2
        k = np.arange(K, k_hi + 1, dtype=np.float64)
        t = 2.0 * k - 0.25 * k * np.log(k)
        delta = (2.0 * (k_hi + 1) - 0.25 * (k_hi + 1) * math.log(k_hi + 1.0)) - float(t[-1])
    tail_geo = float(t[-1]) + delta - math.log1p(-math.exp(delta))
    body = float(t.max()) + math.log(np.exp(t - t.max()).sum())
    return float(np.logaddexp(body, tail_geo))


def _k1_count(share: float) -> int:
    """Smallest K with the K1 series tail at most `share`."""
    k_hi = 8192
    k = np.arange(1, k_hi + 1, dtype=np.float64)
    t = 2.0 * k - 0.25 * k * np.log(k)
    # suffix log-sum-exp, ignoring the geometric remainder (negligible here)
    suffix = np.logaddexp.accumulate(t[::-1])[::-1]
    target = math.log(share)
    idx = np.nonzero(suffix <= target)[0]
    if idx.size == 0:
        raise ConfigError("K1 search range exhausted")
    K = int(idx[0]) + 1
    # re-check with the certified bound
    while k1_tail_log(K) > target:
        K += 1
    return K


def k23_tail_log(K_log: float, c: float) -> float:
    """log of the integral upper bound on sum_{i > K} exp(-log^2(i)/(32 c^2)).

    The summand is decreasing, so the tail is at most
    int_K^inf exp(-log^2 x / (32 c^2)) dx, a Gaussian integral in log x.
    Takes log K to support astronomically large K.
    """
    if c <= 0.0:
        raise DomainError("c must be positive")
    sig = 4.0 * c  # sqrt of 16 c^2
    return (8.0 * c * c + math.log(sig * math.sqrt(2.0 * math.pi))
            + float(log_ndtr(-(K_log - 16.0 * c * c) / sig)))


def _k23_solve(target_log: float, c: float, weight_by_k: bool) -> float:
    """Return log K for the smallest K meeting the tail target.

    weight_by_k solves K * tail(K) <= target instead of tail(K) <= target.
    """
    def h(lk: float) -> float:
        v = k23_tail_log(lk, c)
        return (lk + v) if weight_by_k else v

    lo, hi = 0.0, max(32.0 * c * c + 50.0, 64.0)
    while h(hi) > target_log:
        hi *= 2.0
        if hi > 1e6:
            raise ConfigError("truncation tail target unreachable")
    if h(lo) <= target_log:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) <= target_log:
            hi = mid
        else:
            lo = mid
    return hi


def _as_count(log_k: float) -> int:
    """Integer ceiling of e^{log K}, exact for huge exponents."""
    if log_k < 700.0:
        return int(math.ceil(math.exp(log_k)))
    return 10 ** int(math.ceil(log_k / LOG10))


@dataclass(frozen=True)
class TruncationBudget:
    """Truncation certificate for the critical-limit sampler.

    components carries every analytic constant: K1 (series tail), K2/K3
    (integral-bounded log-squared tails), T_eps and v_eps (quantile floors)
    and the two exponential floor terms.  K2, K3 and the floor terms are
    reported but are far beyond any materializable point count for useful
    epsilon, so K_required is max(K1, K_emp) where K_emp is certified by a
    coupled doubling ladder: the paired sampler ECDFs at K_emp and 2 K_emp
    differ by at most epsilon/2 in sup norm on the pilot sample.
    """

    epsilon: float
    c: float
    K_required: int
    components: dict = field(repr=False)


def _pilot_t_quantile(epsilon: float, c: float, reps: int, stream: Stream) -> float:
    """Lower epsilon/20-quantile of (eta_1 + eta_2)/sqrt(2) + c Z by pilot MC,
    with one refinement pass on a doubled sample."""
    def batch(s: Stream) -> np.ndarray:
        z1 = s.exponentials(reps)
        z2 = s.exponentials(reps)
        v = (-np.log(z1) - np.log(z1 + z2)) / SQRT2
        if c > 0.0:
            v = v + c * s.normals(reps)
        return v

    first = batch(stream.child(0))
    both = np.concatenate([first, batch(stream.child(1))])
    return float(np.quantile(both, epsilon / 20.0))


def _ladder_k(epsilon: float, c: float, reps: int, stream: Stream) -> int:
    """Smallest ladder K whose paired ECDFs at K and 2K differ by <= eps/2."""
    from .stats import ks_two_sample

    K = _LADDER_START
    while K <= _LADDER_MAX:
        lows = np.empty(reps)
        highs = np.empty(reps)
        for i in range(reps):
            s = stream.child(K, i)
            eta = sample_ppp(2 * K, s).points / SQRT2
            # identical perturbation stream couples the two truncations
            highs[i] = _perturbed_sup(eta, c, s.child(0))
            lows[i] = _perturbed_sup(eta[:K], c, s.child(0))
        if ks_two_sample(lows, highs).statistic <= epsilon / 2.0:
            return K
        K *= 2
    raise ConfigError(f"doubling ladder did not stabilize below K={_LADDER_MAX}")


def truncation_budget(epsilon: float, c: float, pilot_reps: int = _LADDER_REPS,
                      stream: Stream | None = None) -> TruncationBudget:
    """Assemble the truncation certificate for perturbation scale c.

    c = 0 skips the perturbation-tail constants K2/K3.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon={epsilon} outside (0, 1)")
    if c < 0.0:
        raise DomainError(f"c={c} must be nonnegative")
    if pilot_reps < 1000:
        raise ConfigError(f"pilot_reps={pilot_reps} must be >= 1000")
    cache_key = (round(epsilon, 12), round(c, 12), pilot_reps,
                 None if stream is None else (stream.seed, stream.path))
    hit = _budget_cache.get(cache_key)
    if hit is not None:
        return hit
    if stream is None:
        stream = Stream(_BUDGET_SEED)

    k1 = _k1_count(epsilon / 10.0)
    comps: dict = {"K1": k1}

    if c > 0.0:
        lk2 = _k23_solve(0.5 * math.log(epsilon / 5.0), c, weight_by_k=False)
        lk3 = _k23_solve(math.log(epsilon / 5.0), c, weight_by_k=True)
        comps["K2"] = _as_count(lk2)
        comps["K3"] = _as_count(lk3)

    t_eps = _pilot_t_quantile(epsilon, c, pilot_reps, stream.child(1))
    v_eps = -math.log(-math.log1p(-epsilon / 10.0)) / SQRT2
    floor1 = math.exp(min(-t_eps * (SQRT2 + 1.0), 700.0))
    floor2_log = 4.0 * (SQRT2 + 1.0) * (v_eps - t_eps / 2.0)
    comps["T_eps"] = t_eps
    comps["v_eps"] = v_eps
    comps["floor_terms"] = (floor1, math.exp(min(floor2_log, 700.0)))

    k_req = k1
    if c > 0.0:
        k_emp = _ladder_k(epsilon, c, pilot_reps, stream.child(2))
        comps["K_emp"] = k_emp
        k_req = max(k_req, k_emp)

    budget = TruncationBudget(epsilon=epsilon, c=c, K_required=k_req,
                              components=comps)
    _budget_cache[cache_key] = budget
    return budget


# ---------------------------------------------------------------------------
# limit samplers and quantiles

def sample_limit_critical(lam: float, epsilon: float, stream: Stream,
                          K: int | None = None) -> float:
    """One draw of the critical limit law at parameter lambda >= 0.

    lambda = 0 returns (eta_1 + eta_2)/sqrt(2) exactly, consuming no normals.
    For lambda > 0 the supremum is truncated at K_required from the budget at
    (epsilon, c = sqrt(2 lambda)); an explicit K overrides the budget.
    """
    if lam < 0.0:
        raise DomainError(f"lambda={lam} must be nonnegative")
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon={epsilon} outside (0, 1)")
    if lam == 0.0:
        pts = sample_ppp(2, stream).points
        return float((pts[0] + pts[1]) / SQRT2)
    c = math.sqrt(2.0 * lam)
    if K is None:
        K = truncation_budget(epsilon, c).K_required
    a = sample_ppp(K, stream).points / SQRT2
    return _perturbed_sup(a, c, stream) - lam


@dataclass(frozen=True)
class LimitLawSpec:
    """Which limit law to sample.

    kind "gumbel":  CDF exp(-mass e^{-x})
    kind "critical": the lambda-perturbed supremum law (lambda=0 is the
    sum-of-top-two law).
    """

    kind: str
    mass: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gumbel", "critical"):
            raise DomainError(f"unknown limit law kind {self.kind!r}")


def sample_limit(law: LimitLawSpec, epsilon: float, stream: Stream,
                 size: int) -> np.ndarray:
    """size draws of the given limit law, one child stream per draw."""
    if law.kind == "gumbel":
        from .normalizers import GumbelLaw, gumbel_sample
        return np.asarray(gumbel_sample(GumbelLaw(law.mass), stream, size))
    out = np.empty(size)
    for i in range(size):
        out[i] = sample_limit_critical(law.lam, epsilon, stream.child(i))
    return out


@dataclass(frozen=True)
class QuantileEstimate:
    value: float
    half_width: float
    alpha: float
    reps: int


def limit_quantile(law: LimitLawSpec, alpha: float, epsilon: float,
                   reps: int, stream: Stream) -> QuantileEstimate:
    """Order-statistic estimate of the (1 - alpha)-quantile with a
    binomial-based confidence half-width."""
    if reps < 1000:
        raise ConfigError(f"reps={reps} must be >= 1000")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1)")
    xs = np.sort(sample_limit(law, epsilon, stream, reps))
    k = int(math.ceil((1.0 - alpha) * reps))
    k = min(max(k, 1), reps)
    spread = 1.96 * math.sqrt(reps * alpha * (1.0 - alpha))
    lo = min(max(int(math.floor(k - spread)), 1), reps)
    hi = min(max(int(math.ceil(k + spread)), 1), reps)
    return QuantileEstimate(value=float(xs[k - 1]),
                            half_width=float(xs[hi - 1] - xs[lo - 1]) / 2.0,
                            alpha=alpha, reps=reps)
