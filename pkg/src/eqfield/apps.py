"""Statistical applications: maximum interpoint distance and largest sample
covariance/correlation of equicorrelated populations.

Data model: observations x_ki (k = 1..n observations, i = 1..p variables)
with the latent representation

    x_ki = sqrt(rho) xi_k + sqrt(1 - rho) xi_ki,

xi_k and xi_ki iid from a symmetric unit-variance marginal.  The interpoint
application uses rho = 0 and treats the p columns as points in R^n.

Every max statistic standardization and every (kappa, rho) -> r correlation
map from the three applications lives here, together with the mixture limit
laws arising for n-dependent marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateColumnError, DomainError, ScaleError
from .normalizers import G1, clamp_r, gumbel_sample
from .limits import sample_limit_critical
from .streams import Stream

LOG_4PI = math.log(4.0 * math.pi)

_DOUBLE_FACT = [1, 1, 3, 15, 105, 945, 10395, 135135]  # (2k-1)!! for k=0..7

_VARIANTS = ("standard_normal", "uniform_mixture", "three_point", "rademacher")


@dataclass(frozen=True)
class MarginalSpec:
    """A symmetric mean-zero unit-variance marginal with closed-form even
    moments up to order 14.

    uniform_mixture(e): Unif[-1,1] with probability 1 - delta and
    Unif(+-(e, 2e)) with probability delta = 2/(7 e^2 - 1); the weight sits
    on the far component so that the variance is exactly 1.
    three_point(logp=L, lambda1): +-sqrt(1 + lambda1/L^2) with probability
    L^2/(2(lambda1 + L^2)) each, else 0.
    """

    variant: str
    e: float = 0.0
    logp: float = 0.0
    lambda1: float = 0.0

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise DomainError(f"unknown marginal variant {self.variant!r}")
        if self.variant == "uniform_mixture" and self.e < 10.0:
            raise DomainError(f"uniform_mixture requires e >= 10, got {self.e}")
        if self.variant == "three_point" and (self.logp <= 0.0 or self.lambda1 <= 0.0):
            raise DomainError("three_point requires positive logp and lambda1")

    @classmethod
    def standard_normal(cls) -> "MarginalSpec":
        return cls("standard_normal")

    @classmethod
    def uniform_mixture(cls, e: float) -> "MarginalSpec":
        return cls("uniform_mixture", e=e)

    @classmethod
    def three_point(cls, logp: float, lambda1: float) -> "MarginalSpec":
        return cls("three_point", logp=logp, lambda1=lambda1)

    @classmethod
    def rademacher(cls) -> "MarginalSpec":
        return cls("rademacher")

    @property
    def delta(self) -> float:
        if self.variant != "uniform_mixture":
            raise DomainError("delta is defined for uniform_mixture only")
        return 2.0 / (7.0 * self.e ** 2 - 1.0)

    def moment(self, k: int) -> float:
        """E xi^{2k} for k in 1..7; odd moments vanish by symmetry."""
        if not 1 <= k <= 7:
            raise DomainError(f"k={k} outside 1..7")
        if self.variant == "standard_normal":
            return float(_DOUBLE_FACT[k])
        if self.variant == "uniform_mixture":
            d = self.delta
            return (1.0 + d * ((2.0 ** (2 * k + 1) - 1.0) * self.e ** (2 * k) - 1.0)) \
                / (2.0 * k + 1.0)
        if self.variant == "three_point":
            return (1.0 + self.lambda1 / self.logp ** 2) ** (k - 1)
        return 1.0  # rademacher

    @property
    def kappa(self) -> float:
        """The fourth moment E xi^4."""
        return self.moment(2)

    def sample(self, size: int, stream: Stream) -> np.ndarray:
        if self.variant == "standard_normal":
            return stream.normals(size)
        if self.variant == "rademacher":
            return np.where(stream.uniforms(size) < 0.5, -1.0, 1.0)
        if self.variant == "three_point":
            a = math.sqrt(1.0 + self.lambda1 / self.logp ** 2)
            q = self.logp ** 2 / (2.0 * (self.lambda1 + self.logp ** 2))
            u = stream.uniforms(size)
            return np.where(u < q, a, np.where(u < 2.0 * q, -a, 0.0))
        # uniform_mixture: u1 picks the component, u2 encodes sign + position
        u1 = stream.uniforms(size)
        u2 = stream.uniforms(size)
        near = 2.0 * u2 - 1.0
        far = np.where(u2 < 0.5,
                       -self.e * (1.0 + 2.0 * u2),
                       self.e * (1.0 + 2.0 * (u2 - 0.5)))
        return np.where(u1 < self.delta, far, near)


@dataclass(frozen=True)
class PopulationSpec:
    n: int
    p: int
    rho: float
    marginal: MarginalSpec

    def __post_init__(self):
        if self.n < 2 or self.p < 2:
            raise DomainError("need n >= 2 and p >= 2")
        if not 0.0 <= self.rho < 1.0:
            raise DomainError(f"rho={self.rho} outside [0, 1)")


def generate_dataset(pop: PopulationSpec, stream: Stream) -> np.ndarray:
    """n x p data matrix with iid rows; Cov(x_i, x_j) = rho for i != j
    (exact for the normal marginal, asymptotic in general)."""
    latent = pop.marginal.sample(pop.n, stream)
    noise = pop.marginal.sample(pop.n * pop.p, stream).reshape(pop.n, pop.p)
    return math.sqrt(pop.rho) * latent[:, None] + math.sqrt(1.0 - pop.rho) * noise


def product_moment_covariance(rho: float, kappa: float, overlap: int) -> float:
    """Cov(x_i x_j, x_k x_l) for one row of the latent representation, by the
    number of shared column indices between {i,j} and {k,l}."""
    if overlap == 0:
        return (kappa - 1.0) * rho ** 2
    if overlap == 1:
        return rho + (kappa - 2.0) * rho ** 2
    if overlap == 2:
        return 1.0 + (kappa - 2.0) * rho ** 2
    raise DomainError(f"overlap={overlap} must be 0, 1 or 2")


def t_moment_covariance(rho: float, kappa: float, overlap: int) -> float:
    """E(T_ij T_kl) for T_ij = x_i x_j - (rho/2)(x_i^2 + x_j^2), one row."""
    scale = (1.0 - rho) ** 2
    if overlap == 0:
        return scale * (kappa - 1.0) * rho ** 2
    if overlap == 1:
        return scale * (rho + 0.25 * (5.0 * kappa - 9.0) * rho ** 2)
    if overlap == 2:
        return scale * (1.0 + 2.0 * rho + 0.5 * rho ** 2 * (3.0 * kappa - 7.0))
    raise DomainError(f"overlap={overlap} must be 0, 1 or 2")


# ---------------------------------------------------------------------------
# maximum interpoint distance

_BLOCK = 256


@dataclass(frozen=True)
class MaxDistance:
    d: float
    d2: float


def max_interpoint(data: np.ndarray) -> MaxDistance:
    """Largest pairwise Euclidean distance among the rows of `data`
    (points-by-coordinates), blocked so memory stays O(p n)."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise DomainError("need at least 2 points (rows)")
    p = data.shape[0]
    norms = np.einsum("ij,ij->i", data, data)
    best = -math.inf
    for lo in range(0, p, _BLOCK):
        hi = min(lo + _BLOCK, p)
        gram = data[lo:hi] @ data.T
        d2 = norms[lo:hi, None] + norms[None, :] - 2.0 * gram
        # keep only pairs (i, j) with global i < j
        rows = np.arange(lo, hi)[:, None]
        d2[rows >= np.arange(p)[None, :]] = -math.inf
        block_best = float(d2.max()) if hi - lo > 0 else -math.inf
        best = max(best, block_best)
    best = max(best, 0.0)
    return MaxDistance(d=math.sqrt(best), d2=best)


def standardize_interpoint(d2: float, n: int, p: int, kappa: float,
                           mode: str) -> float:
    """Standardize a squared maximum distance.

    mode "gumbel":  sqrt(2) c_p (W - sqrt(2) c_p + log(4 sqrt(pi) c_p)/(sqrt(2) c_p))
    mode "critical": c_p (W - sqrt(2) d_p)
    where W = (D^2 - 2n)/sqrt(2n(1 + kappa)).
    """
    if n < 3 or p < 3:
        raise DomainError("need n >= 3 and p >= 3")
    w = (d2 - 2.0 * n) / math.sqrt(2.0 * n * (1.0 + kappa))
    from .field import standardize_value
    return standardize_value(w, p, mode)


# ---------------------------------------------------------------------------
# largest sample covariance / correlation

def _centered_cross(data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] < 2:
        raise DomainError("need an n x p matrix with n >= 2, p >= 2")
    centered = data - data.mean(axis=0, keepdims=True)
    return centered.T @ centered


def max_sample_cov(data: np.ndarray) -> float:
    """R_n = max_{i<j} sum_k (x_ki - mean_i)(x_kj - mean_j)."""
    s = _centered_cross(data)
    iu = np.triu_indices(s.shape[0], k=1)
    return float(s[iu].max())


def max_sample_corr(data: np.ndarray) -> float:
    """M_n, the largest off-diagonal sample correlation."""
    s = _centered_cross(data)
    v = np.diag(s).copy()
    bad = np.nonzero(v <= 0.0)[0]
    if bad.size:
        raise DegenerateColumnError(int(bad[0]))
    c = s / np.sqrt(np.outer(v, v))
    iu = np.triu_indices(s.shape[0], k=1)
    return float(c[iu].max())


_RN_REGIMES = ("i", "ii", "iii", "new_i", "new_ii")
_MN_REGIMES = ("i", "ii", "iii")


def standardize_Rn(value: float, n: int, p: int, rho: float, kappa: float,
                   regime: str) -> float:
    """Standardized largest sample covariance per regime.

    Regimes i/new_i scale by 2 sqrt(log p), ii/iii by 1/rho; new_ii uses the
    alternative second-order centering and scales by log p.
    """
    if regime not in _RN_REGIMES:
        raise DomainError(f"unknown regime {regime!r}; expected one of {_RN_REGIMES}")
    if p < 3:
        raise DomainError("need p >= 3")
    lp = math.log(p)
    slp = math.sqrt(lp)
    root = math.sqrt(1.0 - rho * rho)
    if regime == "new_ii":
        center = (2.0 * slp - (math.log(lp) + LOG_4PI) / (2.0 * slp)) * root
        return lp * (value / math.sqrt(n) - rho * math.sqrt(n) - center)
    center = (2.0 * slp - math.log(lp) / (4.0 * slp)) * root
    rstar = value / math.sqrt(n) - rho * math.sqrt(n) - center
    if regime in ("i", "new_i"):
        return 2.0 * slp * rstar
    if rho == 0.0:
        raise ScaleError(f"regime {regime!r} scale 1/rho degenerates at rho=0")
    return rstar / rho


def standardize_Mn(value: float, n: int, p: int, rho: float, kappa: float,
                   regime: str) -> float:
    """Standardized largest sample correlation per regime.

    M* = sqrt(n) M - rho sqrt(n)
         - (1-rho) sqrt(1 + 2 rho + ((kappa-5)/2) rho^2) (2 sqrt(log p) - log log p/(4 sqrt(log p)))
    scaled by 2 sqrt(log p) (i), 1/rho (ii), 1/(rho(1-rho)) (iii).
    """
    if regime not in _MN_REGIMES:
        raise DomainError(f"unknown regime {regime!r}; expected one of {_MN_REGIMES}")
    if p < 3:
        raise DomainError("need p >= 3")
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho={rho} outside [0, 1)")
    lp = math.log(p)
    slp = math.sqrt(lp)
    radicand = 1.0 + 2.0 * rho + 0.5 * (kappa - 5.0) * rho * rho
    if radicand < 0.0:
        raise DomainError("negative variance radicand; kappa/rho out of range")
    mstar = (math.sqrt(n) * value - rho * math.sqrt(n)
             - (1.0 - rho) * math.sqrt(radicand)
             * (2.0 * slp - math.log(lp) / (4.0 * slp)))
    if regime == "i":
        return 2.0 * slp * mstar
    if rho == 0.0:
        raise ScaleError(f"regime {regime!r} scale degenerates at rho=0")
    if regime == "ii":
        return mstar / rho
    return mstar / (rho * (1.0 - rho))


# ---------------------------------------------------------------------------
# correlation-parameter maps

_APPLICATIONS = ("interpoint", "covariance", "pearson")


def correlation_parameter(application: str, kappa: float, rho: float,
                          section1_variant: bool = False) -> float:
    """Map the population parameters of an application to the field
    correlation r.

    interpoint:  r = (kappa - 1)/(2 kappa + 2)
    covariance:  r = rho/(1 + rho)
    pearson:     r = (rho + ((kappa-5)/4) rho^2) / (1 + 2 rho + ((kappa-5)/2) rho^2)

    section1_variant switches the pearson map to the Gaussian-case summary
    form (rho - rho^2/2)/(1 + 2 rho - rho^2/2); the two disagree away from
    small rho and are both kept for comparison.
    """
    if application not in _APPLICATIONS:
        raise DomainError(f"unknown application {application!r}")
    if kappa < 1.0:
        raise DomainError(f"kappa={kappa} must be >= 1")
    if not 0.0 <= rho < 1.0 and not (application != "interpoint" and rho == 1.0):
        raise DomainError(f"rho={rho} outside [0, 1)")
    if application == "interpoint":
        r = (kappa - 1.0) / (2.0 * kappa + 2.0)
    elif application == "covariance":
        r = rho / (1.0 + rho)
    elif section1_variant:
        r = (rho - rho * rho / 2.0) / (1.0 + 2.0 * rho - rho * rho / 2.0)
    else:
        r = (rho + 0.25 * (kappa - 5.0) * rho * rho) \
            / (1.0 + 2.0 * rho + 0.5 * (kappa - 5.0) * rho * rho)
    try:
        return clamp_r(r)
    except DomainError as exc:
        raise DomainError(
            f"mapped correlation r={r!r} for {application} with kappa={kappa}, "
            f"rho={rho} violates r in [0, 1/2]") from exc


# ---------------------------------------------------------------------------
# mixture limit laws

@dataclass(frozen=True)
class GumbelPlusNormal:
    """G1-Gumbel scaled by 1/(2 lambda) plus N(0, kappa - 1)."""

    lam: float
    kappa: float

    def __post_init__(self):
        if self.lam <= 0.0 or self.kappa < 1.0:
            raise DomainError("need lam > 0 and kappa >= 1")


@dataclass(frozen=True)
class NormalPlusG1:
    """N(0, 2 lambda1 lambda2^2) plus an independent G1 Gumbel."""

    lam1: float
    lam2: float

    def __post_init__(self):
        if self.lam1 <= 0.0 or self.lam2 <= 0.0:
            raise DomainError("need positive lam1 and lam2")


@dataclass(frozen=True)
class NormalPlusScaledSup:
    """N(0, lambda1) plus sqrt(lambda2) times the critical limit at
    lambda2/2 (perturbation scale sqrt(lambda2))."""

    lam1: float
    lam2: float

    def __post_init__(self):
        if self.lam1 < 0.0 or self.lam2 <= 0.0:
            raise DomainError("need lam1 >= 0 and lam2 > 0")


def mixture_limit_sampler(law, epsilon: float, stream: Stream) -> float:
    """One draw of a mixture limit law; components use separate child
    streams so they are exactly independent."""
    if isinstance(law, GumbelPlusNormal):
        g = float(gumbel_sample(G1, stream.child(1), 1)[0])
        z = float(stream.child(0).normals(1)[0])
        return g / (2.0 * law.lam) + math.sqrt(law.kappa - 1.0) * z
    if isinstance(law, NormalPlusG1):
        g = float(gumbel_sample(G1, stream.child(1), 1)[0])
        z = float(stream.child(0).normals(1)[0])
        return math.sqrt(2.0 * law.lam1) * law.lam2 * z + g
    if isinstance(law, NormalPlusScaledSup):
        sup = sample_limit_critical(law.lam2 / 2.0, epsilon, stream.child(1))
        z = float(stream.child(0).normals(1)[0])
        return math.sqrt(law.lam1) * z + math.sqrt(law.lam2) * sup
    raise DomainError(f"unknown mixture law {law!r}")


# ---------------------------------------------------------------------------
# regime classification

@dataclass(frozen=True)
class RegimeReport:
    application: str
    r: float
    regime: str  # gumbel / critical / degenerate
    lam: float | None
    flags: dict


# below this, (1-2r) log p is treated as vanishing
_DEGENERATE_CUT = 0.05
# above this, (1-2r) log p is treated as diverging
_CRITICAL_CUT = 8.0


def classify_regime(pop: PopulationSpec, application: str) -> RegimeReport:
    """Advisory classification of the applicable limit zone.

    Uses the finite-n proxies (1-2r) log p (critical scaling) and
    (1-2r) sqrt(log p)/log log p (weak-dependence scaling).  The flags report
    the moment conditions that are checkable from the marginal family:
    bounded-support (B3) fails for the normal marginal, the linear-regime
    proxy (C1) checks 0.1 <= p/n <= 10, and the moment conditions
    (B1)/(B2)/(C2)/(C3) hold for every shipped marginal family.
    """
    kappa = pop.marginal.kappa
    r = correlation_parameter(application, kappa, pop.rho)
    lp = math.log(pop.p)
    f = 1.0 - 2.0 * r
    lam_proxy = f * lp
    if lam_proxy < _DEGENERATE_CUT:
        regime, lam = "degenerate", None
    elif lam_proxy <= _CRITICAL_CUT:
        regime, lam = "critical", lam_proxy
    else:
        regime, lam = "gumbel", None
    bounded = pop.marginal.variant != "standard_normal"
    flags = {
        "B1": True,
        "B2": True,
        "B3": bounded,
        "C1": 0.1 <= pop.p / pop.n <= 10.0,
        "C2": True,
        "C3": True,
        "weak_dependence_proxy": f * math.sqrt(lp) / math.log(lp) if lp > 1.0 else math.inf,
        "critical_proxy": lam_proxy,
    }
    return RegimeReport(application=application, r=r, regime=regime, lam=lam,
                        flags=flags)
