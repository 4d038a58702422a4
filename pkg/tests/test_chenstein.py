import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr
from scipy.stats import norm

from eqfield.chenstein import (b1, g_exponent, g_exponent_long, joint_event_mc,
                               p12, report)
from eqfield.errors import DomainError
from eqfield.normalizers import norm_constants, threshold_u
from eqfield.streams import Stream


def test_p12_independent_case_factorizes():
    # r = 0: the pair value is independent of the latents, so the truncated
    # probability is P(N > u) times the square of the truncation mass
    for n, y in ((50, 0.0), (500, 1.0), (5000, -1.0)):
        t = norm_constants(n, 0.0).t
        u = threshold_u(n, y)
        want = float(ndtr(-u)) * (ndtr(t) - ndtr(-t)) ** 2
        assert p12(n, 0.0, y) == pytest.approx(want, rel=1e-8)


def test_p12_degenerate_case_against_direct_quadrature():
    # r = 1/2: the pair value is sqrt(1/2)(X_1 + X_2) exactly
    n, y = 200, 0.5
    t = norm_constants(n, 0.5).t
    u = threshold_u(n, y)
    sr = math.sqrt(0.5)

    def f(x1):
        lo = max(-t, u / sr - x1)
        return 0.0 if lo >= t else (ndtr(t) - ndtr(lo)) * norm.pdf(x1)

    want, _ = quad(f, -t, t, epsabs=0.0, epsrel=1e-10, limit=200)
    assert p12(n, 0.5, y) == pytest.approx(want, rel=1e-8)


def test_p12_decreasing_in_threshold_argument():
    vals = [p12(300, 0.2, y) for y in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    assert all(a > b > 0.0 for a, b in zip(vals, vals[1:]))


def test_p12_requires_three_vertices():
    with pytest.raises(DomainError):
        p12(2, 0.1, 0.0)


def test_b1_formula():
    assert b1(3, 0.01) == pytest.approx(9.0 * 0.01 ** 2, rel=1e-15)
    assert b1(10, 2e-4) == pytest.approx(45.0 * 17.0 * 4e-8, rel=1e-15)
    with pytest.raises(DomainError):
        b1(5, -0.1)


def test_g_exponent_special_values():
    assert g_exponent(0.0) == pytest.approx(2.0, rel=1e-15)
    assert g_exponent(0.5) == pytest.approx(0.0, abs=1e-15)
    assert g_exponent(0.125) == pytest.approx(4.0 / 7.0, rel=1e-14)


def test_g_exponent_matches_unsimplified_form():
    for r in np.linspace(0.0, 0.5, 101):
        assert g_exponent(r) == pytest.approx(g_exponent_long(r), abs=1e-12)


def test_g_exponent_lower_bound_and_monotonicity():
    grid = np.linspace(0.0, 0.5, 201)
    vals = [g_exponent(r) for r in grid]
    assert all(v >= (1.0 - 2.0 * r) ** 2 / 2.0 - 1e-12
               for v, r in zip(vals, grid))
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_mean_approaches_exponential_target():
    y = 0.5
    target = math.exp(-y)
    errs = [abs(report(n, 0.1, y, slack=3.0).mean - target)
            for n in (100, 1000, 10000)]
    assert errs[2] < errs[0]
    assert errs[2] < 0.25 * target


def test_report_degenerate_case_fields():
    rep = report(100, 0.5, 0.0, slack=2.0)
    assert rep.b2_exponent == pytest.approx(0.0, abs=1e-15)
    assert rep.b2_bound_log == pytest.approx(2.0 * math.log(math.log(100.0)),
                                             rel=1e-14)
    assert rep.alpha == math.inf
    assert rep.total_error_bound == pytest.approx(rep.b1 + math.exp(rep.b2_bound_log))


def test_report_alpha_at_one_third():
    assert report(100, 1.0 / 3.0, 0.0, slack=1.0).alpha == pytest.approx(1.0, rel=1e-12)


def test_report_rejects_negative_slack():
    with pytest.raises(DomainError):
        report(100, 0.1, 0.0, slack=-1.0)


def test_report_consistency_with_components():
    rep = report(500, 0.2, 1.0, slack=1.5)
    assert rep.p12 == pytest.approx(p12(500, 0.2, 1.0), rel=1e-9)
    assert rep.mean == pytest.approx(500 * 499 / 2.0 * rep.p12, rel=1e-15)
    assert rep.b1 == pytest.approx(b1(500, rep.p12), rel=1e-15)
    assert rep.b2_exponent == pytest.approx(g_exponent(0.2), rel=1e-15)


def test_joint_event_mc_bounds_and_monotonicity():
    lo = joint_event_mc(3, 0.3, 2.0, 100000, Stream(40))
    hi = joint_event_mc(3, 0.3, -5.0, 100000, Stream(41))
    assert 0.0 <= lo <= hi <= 1.0
    assert hi > 0.1
