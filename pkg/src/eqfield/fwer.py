"""Family-wise error rate control for the pairwise max test.

Under the constant-correlation graphical null, the threshold

    u = q_alpha / (2 sqrt(log n)) + 2 sqrt(log n)
        - (log log n + log 4 pi) / (4 sqrt(log n))

controls the probability of any false rejection at asymptotic level alpha.
The standardized maximum sqrt(2) c (M - sqrt(2) c + log(4 sqrt(pi) c) /
(sqrt(2) c)) converges to the standard Gumbel law, and mapping u into that
scale leaves an offset of exactly log(2 sqrt(2)); absorbing it, q_alpha must
be the (1 - alpha)-quantile of the Gumbel law with mass sqrt(2)/4, which
makes P(max > u) -> alpha exactly.  Rejection is by strict inequality: ties
at exactly u are kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError, InputError
from .field import FieldParams, sample_max
from .normalizers import GumbelLaw, gumbel_quantile
from .streams import Stream

#: Gumbel law whose (1 - alpha)-quantile calibrates the threshold exactly.
THRESHOLD_LAW = GumbelLaw(math.sqrt(2.0) / 4.0)


@dataclass(frozen=True)
class FwerThreshold:
    n: int
    alpha: float
    q_alpha: float
    u: float


def threshold(n: int, alpha: float) -> FwerThreshold:
    if n < 3:
        raise DomainError(f"n={n} must be >= 3")
    q = gumbel_quantile(alpha, THRESHOLD_LAW)
    sl = math.sqrt(math.log(n))
    u = (q / (2.0 * sl) + 2.0 * sl
         - (math.log(math.log(n)) + math.log(4.0 * math.pi)) / (4.0 * sl))
    return FwerThreshold(n=n, alpha=alpha, q_alpha=q, u=u)


@dataclass(frozen=True)
class FwerEstimate:
    rate: float
    half_width: float
    reps: int
    threshold: FwerThreshold


def fwer_estimate(n: int, r: float, alpha: float, reps: int,
                  stream: Stream) -> FwerEstimate:
    """Monte Carlo rejection rate of the max test under the null."""
    if not 0.0 <= r < 0.5:
        raise DomainError(f"r={r} outside [0, 1/2)")
    if reps < 1000:
        raise ConfigError(f"reps={reps} must be >= 1000")
    th = threshold(n, alpha)
    params = FieldParams(n=n, r=r)
    hits = 0
    for i in range(reps):
        if sample_max(params, stream.child(i)) > th.u:
            hits += 1
    rate = hits / reps
    half = 1.96 * math.sqrt(rate * (1.0 - rate) / reps)
    return FwerEstimate(rate=rate, half_width=half, reps=reps, threshold=th)


def reject_set(observations: dict, u: float) -> list[tuple[int, int]]:
    """Pairs (i, j) with value strictly above u, in lexicographic order.

    `observations` maps 1-based pairs (i, j), i < j, to values and must be
    complete on the triangle of its largest index.
    """
    if not observations:
        raise InputError("no observations")
    n = 0
    for key in observations:
        i, j = key
        if not (1 <= i < j):
            raise InputError(f"bad pair {key!r}: need 1 <= i < j")
        n = max(n, j)
    missing = [(i, j) for i in range(1, n) for j in range(i + 1, n + 1)
               if (i, j) not in observations]
    if missing:
        raise InputError(f"incomplete triangle, missing pairs: {missing[:20]}")
    return [(i, j) for i in range(1, n) for j in range(i + 1, n + 1)
            if observations[(i, j)] > u]


def read_observations_csv(path) -> dict:
    """CSV rows (i, j, value) with 1-based indices and i < j."""
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != 3:
                raise InputError(f"{path}:{lineno}: expected 3 columns")
            try:
                i, j, v = int(cells[0]), int(cells[1]), float(cells[2])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise InputError(f"{path}:{lineno}: non-numeric row")
            if not 1 <= i < j:
                raise InputError(f"{path}:{lineno}: need 1 <= i < j")
            if (i, j) in out:
                raise InputError(f"{path}:{lineno}: duplicate pair ({i},{j})")
            out[(i, j)] = v
    if not out:
        raise InputError(f"{path}: no observations")
    return out
