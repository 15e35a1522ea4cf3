import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kkperturb.opcore import (DEFAULT_TOL, DomainError, HermitianOperator, NotHermitianError,
                              ToleranceConfig, apply_function, hermitian_eig, operator_norm,
                              psd_margin, random_hermitian, random_unitary, singular_profile)


def test_identity_eigenvalues():
    dec = HermitianOperator(np.eye(4)).eig()
    assert np.allclose(dec.values, 1.0)
    V = dec.vectors
    assert np.allclose(V.conj().T @ V, np.eye(4))


def test_diag_eigenvalues():
    assert np.allclose(HermitianOperator.diag([4.0, 1.0]).eig().values, [1.0, 4.0])


def test_reconstruction(rng):
    H = HermitianOperator(random_hermitian(rng, 8))
    assert operator_norm(H.matrix - H.eig().reconstruct()) < 1e-10


def test_block_detected_decomposition(rng):
    # two decoupled blocks, large enough to take the block path
    A = random_hermitian(rng, 30)
    B = random_hermitian(rng, 40)
    M = np.zeros((70, 70), dtype=complex)
    M[:30, :30] = A
    M[30:, 30:] = B
    perm = rng.permutation(70)
    M = M[np.ix_(perm, perm)]
    dec = hermitian_eig(HermitianOperator(M))
    ref = np.linalg.eigvalsh(M)
    assert np.allclose(dec.values, ref, atol=1e-12)
    assert operator_norm(M - dec.reconstruct()) < 1e-10


def test_near_hermitian_is_symmetrised():
    M = np.array([[1.0, 2.0], [2.0 + 1e-12, 3.0]])
    H = HermitianOperator(M)
    assert np.array_equal(H.matrix, H.matrix.conj().T)
    assert 0 < H.asymmetry < 1e-11


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        HermitianOperator(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[np.nan]]))


def test_matrix_is_read_only():
    H = HermitianOperator(np.eye(2))
    with pytest.raises(ValueError):
        H.matrix[0, 0] = 5.0


def test_tolerance_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(hermitian_tol=0.0)
    with pytest.raises(ValueError):
        ToleranceConfig(inequality_slack=1e-3)


def test_function_identity_and_square(rng):
    H = HermitianOperator(random_hermitian(rng, 6))
    assert np.allclose(apply_function(H, lambda x: x).matrix, H.matrix, atol=1e-12)
    sq = apply_function(HermitianOperator.diag([1.0, 2.0]), lambda x: x ** 2).matrix
    assert np.allclose(sq, np.diag([1.0, 4.0]))


def test_abs_matches_sqrt_of_square(rng):
    H = HermitianOperator(random_hermitian(rng, 7))
    absH = H.func(np.abs)
    sq = HermitianOperator(H.matrix @ H.matrix).func(lambda x: np.sqrt(np.maximum(x, 0)))
    assert operator_norm(absH - sq) < 1e-10


def test_domain_error_names_eigenvalue():
    H = HermitianOperator.diag([-1.0, 2.0])
    with pytest.raises(DomainError, match="-1"):
        H.func(np.log)


def test_operator_norm_cases(rng):
    assert operator_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0)
    assert operator_norm(np.zeros((3, 3))) == 0.0
    M = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    x = rng.standard_normal(9) + 0j
    for _ in range(2000):
        x = M.conj().T @ (M @ x)
        x /= np.linalg.norm(x)
    power = np.sqrt(np.linalg.norm(M.conj().T @ (M @ x)))
    assert operator_norm(M) == pytest.approx(power, rel=1e-8)


def test_singular_profile_rank_one_and_unitary(rng):
    u = rng.standard_normal(6)
    s = singular_profile(np.outer(u, u)).values
    assert np.count_nonzero(s > 1e-12 * s[0]) == 1
    prof = singular_profile(random_unitary(rng, 8))
    assert np.allclose(prof.values, 1.0)
    assert prof.decay_rate == pytest.approx(0.0, abs=1e-12)


def test_singular_profile_geometric():
    s = 2.0 ** -np.arange(8)
    prof = singular_profile(np.diag(s))
    k = np.arange(2, 9)
    oracle = np.polyfit(np.log(k), np.log(s[1:]), 1)[0]
    assert prof.decay_rate == pytest.approx(oracle, rel=1e-12)


def test_singular_profile_one_by_one():
    assert singular_profile(np.array([[2.0]])).decay_rate is None


def test_psd_margin():
    assert psd_margin(np.eye(3)) == pytest.approx(1.0)
    assert psd_margin(np.diag([2.0, -3.0])) == pytest.approx(-3.0)
    B = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert psd_margin(B - B) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_functional_calculus_is_multiplicative(n, seed):
    r = np.random.default_rng(seed)
    H = HermitianOperator(random_hermitian(r, n))
    f = H.func(np.sin)
    g = H.func(np.cos)
    assert operator_norm(f @ g - H.func(lambda x: np.sin(x) * np.cos(x))) < 1e-10
    # f(H) commutes with H
    assert operator_norm(f @ H.matrix - H.matrix @ f) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_norm_unitarily_invariant(n, seed):
    r = np.random.default_rng(seed)
    M = random_hermitian(r, n)
    U = random_unitary(r, n)
    assert operator_norm(U @ M @ U.conj().T) == pytest.approx(operator_norm(M), rel=1e-10)
