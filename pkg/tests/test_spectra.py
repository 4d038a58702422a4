import numpy as np
import pytest

from eqfield.errors import DomainError, NumericError, SizeError
from eqfield.spectra import (VERIFY_CAP, PairMatrixSpec, build_pair_covariance,
                             jacobi_eigenvalues, spectrum_closed_form,
                             verify_spectrum)


def test_spec_validation():
    with pytest.raises(DomainError):
        PairMatrixSpec(p=3, b=0.1)
    with pytest.raises(DomainError):
        PairMatrixSpec(p=5, b=0.5)
    with pytest.raises(DomainError):
        PairMatrixSpec(p=5, b=-0.01)
    assert PairMatrixSpec(p=7, b=0.1).d == 21


def test_zero_overlap_weight_gives_identity():
    a = build_pair_covariance(PairMatrixSpec(p=6, b=0.0))
    np.testing.assert_array_equal(a, np.eye(15))


def test_matrix_entries_for_four_vertices():
    a = build_pair_covariance(PairMatrixSpec(p=4, b=0.3))
    # pairs in order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)
    np.testing.assert_array_equal(np.diag(a), np.ones(6))
    assert a[0, 1] == 0.3      # (0,1) vs (0,2) share vertex 0
    assert a[0, 5] == 0.0      # (0,1) vs (2,3) disjoint
    assert a[1, 4] == 0.0      # (0,2) vs (1,3) disjoint
    assert a[2, 3] == 0.0      # (0,3) vs (1,2) disjoint
    np.testing.assert_array_equal(a, a.T)
    # every pair meets 2(p-2) = 4 others in exactly one vertex
    assert np.count_nonzero(a[0] == 0.3) == 4


def test_closed_form_trace_and_multiplicities():
    for p in (4, 6, 11):
        for b in (0.0, 0.2, 0.49):
            spec = PairMatrixSpec(p=p, b=b)
            eigs = spectrum_closed_form(spec)
            assert sum(m for _, m in eigs) == spec.d
            assert sum(v * m for v, m in eigs) == pytest.approx(spec.d, rel=1e-12)
            assert eigs == sorted(eigs, key=lambda t: -t[0])


def test_closed_form_reference_values():
    assert spectrum_closed_form(PairMatrixSpec(p=5, b=0.25)) == [
        (1.0 + 2.0 * 0.25 * 3, 1), (1.0 + 0.25, 4), (0.5, 5)]
    top, mid, bot = spectrum_closed_form(PairMatrixSpec(p=4, b=0.4))
    assert top == (pytest.approx(2.6), 1)
    assert mid == (pytest.approx(1.0), 3)
    assert bot == (pytest.approx(0.2), 2)


def test_smallest_eigenvalue_decreases_in_b():
    mins = [spectrum_closed_form(PairMatrixSpec(p=6, b=b))[-1][0]
            for b in (0.0, 0.1, 0.3, 0.49)]
    assert all(a > c for a, c in zip(mins, mins[1:]))
    assert all(m > 0.0 for m in mins)


def test_jacobi_against_numpy_on_random_symmetric():
    rng = np.random.default_rng(7)
    for d in (2, 5, 12):
        m = rng.standard_normal((d, d))
        m = (m + m.T) / 2.0
        got = jacobi_eigenvalues(m, off_tol=1e-12)
        want = np.sort(np.linalg.eigvalsh(m))
        np.testing.assert_allclose(got, want, atol=1e-9)


def test_jacobi_sweep_budget_exhaustion():
    m = np.array([[1.0, 0.5], [0.5, 1.0]])
    with pytest.raises(NumericError):
        jacobi_eigenvalues(m, off_tol=1e-12, max_sweeps=0)


def test_verify_spectrum_over_small_grid():
    for p in range(4, 10):
        for b in (0.0, 0.01, 0.05, 0.25, 0.49):
            ok, dev = verify_spectrum(PairMatrixSpec(p=p, b=b), tol=1e-8)
            assert ok, (p, b, dev)
            assert dev <= 1e-8


def test_verify_spectrum_near_degenerate_weight():
    ok, dev = verify_spectrum(PairMatrixSpec(p=12, b=0.49), tol=1e-8)
    assert ok and dev <= 1e-8


def test_verify_spectrum_cap():
    with pytest.raises(SizeError):
        verify_spectrum(PairMatrixSpec(p=VERIFY_CAP + 1, b=0.1), tol=1e-8)
    with pytest.raises(DomainError):
        verify_spectrum(PairMatrixSpec(p=5, b=0.1), tol=0.0)
