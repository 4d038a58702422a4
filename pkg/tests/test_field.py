import math

import numpy as np
import pytest
from scipy.special import ndtr

from eqfield.errors import DomainError, FactorizationError, SizeError
from eqfield.field import (CENTERING_MODES, DENSE_CAP, FieldParams,
                           sample_field_dense, sample_max,
                           sample_max_graphical, standardize_value,
                           standardized_max)
from eqfield.stats import ks_one_sample, ks_two_sample
from eqfield.streams import Stream


def test_params_validation():
    with pytest.raises(DomainError):
        FieldParams(n=1, r=0.0)
    with pytest.raises(DomainError):
        FieldParams(n=10, r=0.6)
    assert FieldParams(n=10, r=0.5 + 1e-13).r == 0.5
    assert FieldParams(n=10, r=0.2).pair_count == 45


def test_single_pair_is_standard_normal():
    draws = np.array([sample_max(FieldParams(n=2, r=0.3), Stream(1, (i,)))
                      for i in range(20000)])
    assert ks_one_sample(draws, ndtr).statistic < 0.015


def test_degenerate_r_equals_top_two_latents():
    params = FieldParams(n=200, r=0.5)
    for i in range(5):
        got = sample_max(params, Stream(2, (i,)))
        x = np.sort(Stream(2, (i,)).normals(200))
        assert got == pytest.approx(math.sqrt(0.5) * (x[-1] + x[-2]), rel=1e-14)


def test_independent_case_sign_probability():
    # with r=0 all 3 pair values are iid normals, so P(max <= 0) = 1/8
    params = FieldParams(n=3, r=0.0)
    hits = sum(sample_max(params, Stream(3, (i,))) <= 0.0 for i in range(20000))
    assert hits / 20000 == pytest.approx(0.125, abs=0.01)


def test_independent_shortcut_law_matches_direct_maximum():
    # above the dense cap the r=0 draw comes from a single inverse-CDF call
    n = 65
    m = n * (n - 1) // 2
    params = FieldParams(n=n, r=0.0)
    a = np.array([sample_max(params, Stream(4, (i,))) for i in range(3000)])
    b = np.array([Stream(5, (i,)).normals(m).max() for i in range(3000)])
    assert ks_two_sample(a, b).statistic < 0.05


def test_streamed_equals_dense_maximum():
    for n in (5, 17, 64):
        for r in (0.0, 0.25, 0.4999, 0.5):
            params = FieldParams(n=n, r=r)
            dense = sample_field_dense(params, Stream(6, (n,)))
            iu = np.triu_indices(n, k=1)
            assert sample_max(params, Stream(6, (n,))) == float(dense[iu].max())


def test_dense_cap_enforced():
    with pytest.raises(SizeError):
        sample_field_dense(FieldParams(n=65, r=0.0), Stream(0))


def test_dense_field_is_symmetric_with_zero_diagonal():
    g = sample_field_dense(FieldParams(n=8, r=0.3), Stream(7))
    np.testing.assert_array_equal(g, g.T)
    np.testing.assert_array_equal(np.diag(g), np.zeros(8))


def test_dense_field_covariances():
    reps = 30000
    r = 0.25
    params = FieldParams(n=4, r=r)
    g12 = np.empty(reps)
    g13 = np.empty(reps)
    g34 = np.empty(reps)
    loop = np.empty(reps)
    for i in range(reps):
        g = sample_field_dense(params, Stream(8, (i,)))
        g12[i], g13[i], g34[i] = g[0, 1], g[0, 2], g[2, 3]
        loop[i] = g[0, 1] - g[1, 2] + g[2, 3] - g[3, 0]
    se = 1.0 / math.sqrt(reps)
    assert np.mean(g12 * g13) == pytest.approx(r, abs=3 * se)
    assert np.mean(g12 * g34) == pytest.approx(0.0, abs=3 * se)
    assert np.var(g12) == pytest.approx(1.0, abs=5 * se)
    assert np.var(loop) == pytest.approx(4.0 - 8.0 * r, abs=12 * se)


def test_standardize_value_is_affine():
    for mode in CENTERING_MODES:
        f0 = standardize_value(0.0, 1000, mode)
        f1 = standardize_value(1.0, 1000, mode)
        f2 = standardize_value(2.0, 1000, mode)
        assert f2 - f1 == pytest.approx(f1 - f0, rel=1e-12)


def test_standardize_value_slopes():
    c = math.sqrt(2.0 * math.log(1000.0))
    slope_g = standardize_value(1.0, 1000, "gumbel") - standardize_value(0.0, 1000, "gumbel")
    slope_c = standardize_value(1.0, 1000, "critical") - standardize_value(0.0, 1000, "critical")
    assert slope_g == pytest.approx(math.sqrt(2.0) * c, rel=1e-12)
    assert slope_c == pytest.approx(c, rel=1e-12)


def test_standardize_value_unknown_mode():
    with pytest.raises(DomainError):
        standardize_value(0.0, 100, "nope")


def test_standardized_max_requires_n_three():
    with pytest.raises(DomainError):
        standardized_max(FieldParams(n=2, r=0.0), "gumbel", Stream(0))


def test_degenerate_standardized_mean():
    # r = 1/2: the standardized maximum is near the sum-of-top-two limit law
    params = FieldParams(n=5000, r=0.5)
    draws = np.array([standardized_max(params, "critical", Stream(9, (i,)))
                      for i in range(2000)])
    # exact finite-n mean from order-statistic quadrature: -0.0692
    assert draws.mean() == pytest.approx(-0.0692, abs=0.08)


def test_graphical_scalar_path_equals_sample_max():
    for i in range(10):
        a = sample_max_graphical(12, 0.3, Stream(10, (i,)))
        b = sample_max(FieldParams(n=12, r=0.3), Stream(10, (i,)))
        assert a == b


def test_graphical_identity_covariance_is_iid_maximum():
    n = 8
    d = n * (n - 1) // 2
    got = sample_max_graphical(n, np.eye(d), Stream(11, (0,)))
    want = float(Stream(11, (0,)).normals(d).max())
    assert got == pytest.approx(want, rel=1e-14)


def test_graphical_matrix_matches_constant_r_law():
    n = 6
    iu = np.triu_indices(n, k=1)
    pairs = list(zip(iu[0], iu[1]))
    d = len(pairs)
    r = 0.3
    cov = np.zeros((d, d))
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            shared = len({i, j} & {k, l})
            cov[a, b] = 1.0 if shared == 2 else (r if shared == 1 else 0.0)
    x = np.array([sample_max_graphical(n, cov, Stream(12, (i,))) for i in range(4000)])
    y = np.array([sample_max(FieldParams(n=n, r=r), Stream(13, (i,))) for i in range(4000)])
    assert ks_two_sample(x, y).statistic < 0.04


def test_graphical_rejects_bad_inputs():
    with pytest.raises(FactorizationError) as exc:
        bad = np.eye(6)
        bad[0, 1] = bad[1, 0] = 0.9
        bad[0, 2] = bad[2, 0] = 0.9
        bad[1, 2] = bad[2, 1] = -0.9
        sample_max_graphical(4, bad, Stream(0))
    assert exc.value.pivot_index >= 0
    with pytest.raises(DomainError):
        sample_max_graphical(4, np.eye(5), Stream(0))
    with pytest.raises(DomainError):
        m = np.eye(6)
        m[0, 1] = 0.5
        sample_max_graphical(4, m, Stream(0))
    with pytest.raises(DomainError):
        sample_max_graphical(4, 2.0 * np.eye(6), Stream(0))
    with pytest.raises(SizeError):
        sample_max_graphical(100, np.eye(4950), Stream(0))


def test_dense_cap_constant():
    assert DENSE_CAP == 64
