"""Pair-covariance matrices with constant one-overlap covariance b and their
closed-form spectrum.

For p >= 4 vertices, the matrix A on the d = p(p-1)/2 pairs has entries 1, b,
0 according to overlap 2, 1, 0.  Its spectrum is

    1 + 2b(p-2)   multiplicity 1
    1 + b(p-4)    multiplicity p-1
    1 - 2b        multiplicity d - p

so the smallest eigenvalue is 1 - 2b > 0 for b < 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, SizeError

#: verify_spectrum dense cap on the vertex count.
VERIFY_CAP = 16

_CLUSTER_GAP = 1e-6
_MAX_SWEEPS = 60


@dataclass(frozen=True)
class PairMatrixSpec:
    p: int
    b: float

    def __post_init__(self):
        if self.p < 4:
            raise DomainError(f"p={self.p} must be >= 4")
        if not 0.0 <= self.b < 0.5:
            raise DomainError(f"b={self.b} outside [0, 1/2)")

    @property
    def d(self) -> int:
        return self.p * (self.p - 1) // 2


def build_pair_covariance(spec: PairMatrixSpec) -> np.ndarray:
    """The d x d matrix over lexicographically ordered pairs."""
    i, j = np.triu_indices(spec.p, k=1)
    overlap = ((i[:, None] == i[None, :]).astype(np.int8)
               + (i[:, None] == j[None, :])
               + (j[:, None] == i[None, :])
               + (j[:, None] == j[None, :]))
    a = np.where(overlap == 2, 1.0, np.where(overlap == 1, spec.b, 0.0))
    return a


def spectrum_closed_form(spec: PairMatrixSpec) -> list[tuple[float, int]]:
    """[(eigenvalue, multiplicity)] sorted descending; multiplicities sum to d."""
    p, b = spec.p, spec.b
    return [(1.0 + 2.0 * b * (p - 2), 1),
            (1.0 + b * (p - 4), p - 1),
            (1.0 - 2.0 * b, spec.d - p)]


def jacobi_eigenvalues(a: np.ndarray, off_tol: float,
                       max_sweeps: int = _MAX_SWEEPS) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic plane rotations.

    Sweeps until the off-diagonal Frobenius norm drops below off_tol.
    """
    a = np.array(a, dtype=float)
    d = a.shape[0]
    for _ in range(max_sweeps):
        off_entries = a - np.diag(np.diag(a))
        off = math.sqrt(np.sum(off_entries * off_entries))
        if off < off_tol:
            return np.sort(np.diag(a))
        for p_ in range(d - 1):
            for q_ in range(p_ + 1, d):
                apq = a[p_, q_]
                if apq == 0.0:
                    continue
                theta = (a[q_, q_] - a[p_, p_]) / (2.0 * apq)
                if abs(theta) > 1e10:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = math.copysign(1.0, theta) / (
                        abs(theta) + math.sqrt(theta * theta + 1.0))
                cth = 1.0 / math.sqrt(t * t + 1.0)
                sth = t * cth
                rp = a[p_, :].copy()
                rq = a[q_, :].copy()
                a[p_, :] = cth * rp - sth * rq
                a[q_, :] = sth * rp + cth * rq
                cp = a[:, p_].copy()
                cq = a[:, q_].copy()
                a[:, p_] = cth * cp - sth * cq
                a[:, q_] = sth * cp + cth * cq
    raise NumericError(f"Jacobi sweeps did not converge in {max_sweeps} sweeps")


def verify_spectrum(spec: PairMatrixSpec, tol: float) -> tuple[bool, float]:
    """Compare the brute-force spectrum against the closed form.

    Returns (match, max eigenvalue deviation).  For b >= 0.05 the numeric
    eigenvalues are clustered (gap 1e-6) and multiplicities compared; for
    smaller b the closed form and numeric spectrum are compared as sorted
    vectors, since near b = 0 the three branches collide.
    """
    if spec.p > VERIFY_CAP:
        raise SizeError(f"p={spec.p} exceeds verification cap {VERIFY_CAP}")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    a = build_pair_covariance(spec)
    numeric = jacobi_eigenvalues(a, off_tol=tol * spec.d / 100.0)
    closed = spectrum_closed_form(spec)
    expected = np.sort(np.concatenate(
        [np.full(m, v) for v, m in closed]))
    dev = float(np.max(np.abs(numeric - expected)))
    ok = dev <= tol
    if spec.b >= 0.05:
        clusters = []
        start = 0
        for k in range(1, len(numeric) + 1):
            if k == len(numeric) or numeric[k] - numeric[k - 1] > _CLUSTER_GAP:
                clusters.append((float(np.mean(numeric[start:k])), k - start))
                start = k
        want = sorted((v, m) for v, m in closed if m > 0)
        got = sorted(clusters)
        ok = ok and len(want) == len(got) and all(
            gm == wm and abs(gv - wv) <= tol for (gv, gm), (wv, wm) in zip(got, want))
    return ok, dev
