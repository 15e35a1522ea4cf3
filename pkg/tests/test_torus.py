import itertools

import numpy as np
import pytest

from kkperturb.opcore import operator_norm
from kkperturb.perturb import BOUNDED
from kkperturb.torus import (DEFAULT_K, DEFAULT_THETA, ParameterError, TorusBasis,
                             circle_dilation_compare, reduce_word, resolvent_profile,
                             torus_conformal_observable, torus_conformal_pair, torus_dirac,
                             torus_identity_residual, torus_left_mult, torus_right_mult,
                             vacuum_trace, word_matrix)
from kkperturb.transforms import lipschitz_alpha_norm
from kkperturb.lab.sweep import run_sweep

THETA = DEFAULT_THETA
LAM = np.exp(2j * np.pi * THETA)


@pytest.fixture(scope="module")
def basis():
    return TorusBasis(4, THETA)


def unit(basis, m, n):
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.index(m, n)] = 1.0
    return v


def test_left_shifts(basis):
    U = torus_left_mult("U", basis)
    V = torus_left_mult("V", basis)
    assert np.allclose(U @ unit(basis, 0, 0), unit(basis, 1, 0))
    assert np.allclose(V @ unit(basis, 1, 0), LAM * unit(basis, 1, 1))


def test_commutation_relation_on_interior(basis):
    U = torus_left_mult("U", basis)
    V = torus_left_mult("V", basis)
    keep = np.flatnonzero(basis.interior(1))
    R = (V @ U - LAM * U @ V)[:, keep]
    assert np.max(np.abs(R)) < 1e-15


def test_right_multiplication(basis):
    RU = torus_right_mult("U", basis)
    RV = torus_right_mult("V", basis)
    assert np.allclose(RU @ unit(basis, 0, 0), unit(basis, 1, 0))
    # V U = lam U V, so right U on e_{0,1} = V carries lam^{+1}
    assert np.allclose(RU @ unit(basis, 0, 1), LAM * unit(basis, 1, 1))
    LU = torus_left_mult("U", basis)
    keep = np.flatnonzero(basis.interior(1))
    assert np.max(np.abs((LU @ RV - RV @ LU)[:, keep])) < 1e-15


def test_adjoint_generators(basis):
    U = torus_left_mult("U", basis)
    Us = torus_left_mult("U*", basis)
    keep = np.flatnonzero(basis.interior(1))
    assert np.allclose((Us @ U)[:, keep], np.eye(basis.dim)[:, keep])


def test_derivation_eigenvalues(basis):
    from kkperturb.torus import torus_derivations
    d1, d2 = torus_derivations(basis)
    k = basis.index(3, -2)
    assert d1[k, k] == 3 and d2[k, k] == -2


def test_dirac_square_blocks():
    basis = TorusBasis(3)
    trip = torus_dirac(basis, 1j)
    D = trip.dirac.matrix
    m, n = basis.coords()
    w = np.abs(m + 1j * n) ** 2
    D2 = D @ D
    assert np.allclose(D2, np.diag(np.concatenate([w, w])))
    assert trip.interior_mask.sum() == 2 * 25


def test_dirac_rejects_bad_tau():
    with pytest.raises(ParameterError):
        torus_dirac(TorusBasis(2), 1.0 + 0j)


def test_commutator_with_U_plateaus():
    def observable(N):
        trip = torus_dirac(TorusBasis(int(N)), 1j)
        keep = np.flatnonzero(trip.interior_mask)
        D = trip.dirac.matrix
        U = trip.generators["U"]
        return operator_norm((D @ U - U @ D)[:, keep])

    rep = run_sweep(observable, [3, 4, 5, 6], name="torus:[D,U]")
    assert rep.classification == BOUNDED
    assert rep.values[-1] == pytest.approx(1.0)


def test_k_one_is_trivial(basis):
    pair = torus_conformal_pair(basis, 1j, {(0, 0): 1.0})
    assert np.allclose(pair.perturbed.dirac.matrix, pair.base.dirac.matrix)
    assert np.allclose(pair.D_k2, pair.base.dirac.matrix)
    assert pair.identity_residual == 0.0


def test_identity_residual(basis):
    pair = torus_conformal_pair(basis, 1j, DEFAULT_K)
    assert pair.identity_residual < 1e-10
    assert torus_identity_residual(8) < 1e-10


def test_non_invertible_k_rejected(basis):
    with pytest.raises(ParameterError):
        torus_conformal_pair(basis, 1j, {(0, 0): 0.5, (1, 0): 0.5, (-1, 0): 0.5})


def test_fiber_path_matches_full_matrix():
    from kkperturb.perturb import conformal_difference_norm
    basis = TorusBasis(4)
    pair = torus_conformal_pair(basis, 1j)
    U = pair.base.generators["U"]
    full = conformal_difference_norm(pair.base.dirac, pair.mu, U, 0.5)
    assert torus_conformal_observable(4) == pytest.approx(full, rel=1e-10)


def test_conformal_sweep_plateau():
    rep = run_sweep(torus_conformal_observable, [8, 12, 16, 20, 24], name="torus")
    assert rep.classification == BOUNDED
    assert rep.values[-1] == pytest.approx(1.3242592532, rel=1e-8)


def test_resolvent_profile_decays():
    prof = resolvent_profile(TorusBasis(16))
    # eigenvalue count below r^2 grows like r^2, so s_k ~ 1/k
    assert prof.decay_rate == pytest.approx(-1.0, abs=0.05)


def test_vacuum_trace_matches_word_reduction():
    basis = TorusBasis(5)
    letters = ("U", "V", "U*", "V*")
    for length in range(1, 5):
        for word in itertools.product(letters, repeat=length):
            phase, m, n = reduce_word(word, THETA)
            expected = phase if (m, n) == (0, 0) else 0.0
            got = vacuum_trace(word_matrix(word, basis), basis)
            assert abs(got - expected) < 1e-12, word


def test_circle_dilation():
    rep = circle_dilation_compare(32, 1.0, 0.0)
    assert rep.sup_difference == 0.0
    rep = circle_dilation_compare(8, 2.0, 0.0)
    # entry n = 1 of F_{2D} - F_D is 2/sqrt(5) - 1/sqrt(2)
    n1 = 2 / np.sqrt(5) - 1 / np.sqrt(2)
    assert n1 == pytest.approx(0.1873204098, abs=1e-10)
    D = np.arange(-8, 9, dtype=float)
    diff = 2 * D / np.sqrt(1 + 4 * D * D) - D / np.sqrt(1 + D * D)
    assert diff[9] == pytest.approx(n1, abs=1e-15)
    assert rep.sup_difference == pytest.approx(np.max(np.abs(diff)), rel=1e-12)
    rep = circle_dilation_compare(256, 2.0, 0.0)
    assert rep.profile.values[128] < 1e-3


def test_circle_lipschitz_of_shift():
    from kkperturb.torus import circle_dirac, circle_shift
    n = lipschitz_alpha_norm(circle_dirac(10), circle_shift(10), 0.0)
    assert n == (pytest.approx(1.0), pytest.approx(1.0))
