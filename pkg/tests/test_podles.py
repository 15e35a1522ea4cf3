from fractions import Fraction

import numpy as np
import pytest

from kkperturb.opcore import operator_norm
from kkperturb.perturb import BOUNDED, DIVERGENT
from kkperturb.podles.algebra import A, B, C, D, ONE, PeterWeyl, SUq2
from kkperturb.podles.sphere import (FUNDAMENTAL, LadderError, PeterWeylIndex, build_podles_dirac,
                                     haar_state, k_actions, kappa, modular_residual,
                                     mu_half_check, omega_action, omega_adjoint_residual,
                                     omega_composition_residual, podles_truncation, q_number,
                                     relation_residuals, spinor_grading, leibniz_residuals,
                                     star_relation_residuals, twisted_commutator_norm)
from kkperturb.lab.sweep import run_sweep

Q = Fraction(1, 2)


def mono(m):
    return {m: Fraction(1)}


# -- exact algebra ----------------------------------------------------------------

@pytest.fixture(scope="module")
def alg():
    return SUq2(Q)


@pytest.mark.parametrize("x,y,scale", [(A, B, Q), (A, C, Q), (B, D, Q), (C, D, Q), (B, C, 1)])
def test_commutation_relations_exact(alg, x, y, scale):
    lhs = alg.mul(mono(x), mono(y))
    rhs = alg.mul(mono(y), mono(x))
    assert lhs == {k: scale * v for k, v in rhs.items()}


def test_determinant_relations_exact(alg):
    bc = alg.mul(mono(B), mono(C))
    ad = alg.mul(mono(A), mono(D))
    da = alg.mul(mono(D), mono(A))
    assert ad == {ONE: Fraction(1), **{k: Q * v for k, v in bc.items()}}
    assert da == {ONE: Fraction(1), **{k: v / Q for k, v in bc.items()}}


def test_star_is_antilinear_antimultiplicative(alg):
    x = alg.mul(mono(A), mono(B))
    lhs = alg.star(x)
    rhs = alg.mul(alg.star(mono(B)), alg.star(mono(A)))
    assert lhs == rhs
    assert alg.star(mono(A)) == mono(D)
    assert alg.star(mono(B)) == {C: -Q}


def test_haar_closed_form(alg):
    # h((bc)^p) = (-q)^p (1 - q^2) / (1 - q^(2p+2))
    for p in range(6):
        expected = (-Q) ** p * (1 - Q ** 2) / (1 - Q ** (2 * p + 2))
        assert alg.haar_z(p) == expected
    assert alg.haar_z(1) == Fraction(-2, 5)
    assert alg.haar_z(2) == Fraction(4, 21)


def test_peter_weyl_orthogonal(alg):
    pw = PeterWeyl(alg, 3)
    keys = sorted(pw.keys())
    for u in keys:
        assert pw.norm2(u) > 0
        for v in keys:
            if u < v:
                assert alg.inner(pw.s[u], pw.s[v]) == 0


# -- q-numbers and ladder coefficients ---------------------------------------------------

def test_q_numbers():
    for q in (0.3, 0.5, 0.9):
        assert q_number(0, q) == 0.0
        assert q_number(1, q) == pytest.approx(1.0, abs=1e-15)
    assert q_number(2, 0.999) == pytest.approx(2.0, abs=1e-5)
    assert q_number(2, 0.5) == pytest.approx(2.5, abs=1e-15)
    with pytest.raises(ValueError):
        q_number(1, 1.0)


def test_kappa_values():
    # top rung: dE annihilates j = l
    assert kappa(0.5, 1.5, 0.5) == 0.0
    assert kappa(2.5, 3.5, 0.8) == 0.0
    assert kappa(0.5, 1, 0.5) == pytest.approx(np.sqrt(1 - q_number(0.5, 0.5) ** 2), abs=1e-15)
    # off-ladder weight evaluated with the real-exponent q-number
    expected = np.sqrt(1.0 - q_number(-0.5, 0.5) ** 2)
    assert kappa(0.5, 0, 0.5) == pytest.approx(expected, abs=1e-15)
    for k in (-0.5, 0.5, 1.5):
        assert kappa(1.5, k, 0.999) == pytest.approx(np.sqrt(4 - (k - 0.5) ** 2), abs=1e-3)
    with pytest.raises(LadderError):
        kappa(0.5, 3, 0.5)


# -- truncated sphere --------------------------------------------------------------------

@pytest.fixture(scope="module", params=[0.5, 0.8])
def tr(request):
    return podles_truncation(request.param, 3.0)


def test_dirac_spin_half_block():
    t = podles_truncation(0.5, 0.5)
    D = build_podles_dirac(t).dirac.matrix
    # one 2x2 block [[0, k], [k, 0]] per row index i = -1/2, 1/2
    assert D.shape == (4, 4)
    assert np.all(np.diag(D) == 0)
    k = kappa(0.5, 0.5, 0.5)
    assert k == pytest.approx(1.0)
    assert np.allclose(np.linalg.eigvalsh(D), [-k, -k, k, k])


def test_dirac_classical_limit():
    t = podles_truncation(0.999, 2.5)
    w = np.sort(np.abs(np.linalg.eigvalsh(build_podles_dirac(t).dirac.matrix)))
    classical = np.sort(np.concatenate([[l + 0.5] * int(2 * (2 * l + 1))
                                        for l in (0.5, 1.5, 2.5)]))
    assert np.max(np.abs(w - classical)) < 1e-2


def test_dirac_anticommutes_with_grading(tr):
    D = build_podles_dirac(tr).dirac.matrix
    G = spinor_grading(tr)
    assert np.max(np.abs(G @ D + D @ G)) == 0.0


def test_k_actions():
    t = podles_truncation(0.5, 1.0)
    K, Kinv, _, _ = k_actions(t)
    v = t.vacuum
    assert K[v, v] == 1.0
    for i in (-0.5, 0.5):
        u = t.index(0.5, i, 0.5)
        assert K[u, u] == pytest.approx(0.5 ** 0.5)
    # q^j q^-j is 1 up to one rounding
    assert np.max(np.abs(K @ Kinv - np.eye(t.dim))) <= 2 * np.finfo(float).eps


def test_left_a_on_unit():
    t = podles_truncation(0.5, 1.0)
    out = t.gen_op("a")[:, t.vacuum]
    u = t.index(0.5, -0.5, -0.5)
    expected = np.zeros(t.dim)
    expected[u] = np.sqrt(t.haar_weights[u])
    assert np.allclose(out, expected)


def test_relations_and_leibniz(tr):
    res = relation_residuals(tr)
    assert len(res) == 7
    assert max(res.values()) < 1e-9
    assert max(leibniz_residuals(tr).values()) < 1e-8
    assert max(star_relation_residuals(tr).values()) < 1e-8


def test_haar_state_values(tr):
    assert haar_state(np.eye(tr.dim), tr) == 1.0
    Lc = tr.gen_op("c")
    val = haar_state(Lc.T @ Lc, tr)
    exact = float(tr.alg.haar(tr.alg.mul(tr.alg.star(mono(C)), mono(C))))
    assert 0.0 < val < 1.0
    assert val == pytest.approx(exact, rel=1e-12)


def test_modular_property_random_words(tr):
    r = np.random.default_rng(5)
    for _ in range(50):
        n1 = int(r.integers(1, 4))
        n2 = int(r.integers(1, 7 - n1))
        alpha = tuple(r.choice(list("abcd"), n1))
        beta = tuple(r.choice(list("abcd"), n2))
        assert modular_residual(tr, alpha, beta) < 1e-9


def test_omega_unit_is_identity(tr):
    W = omega_action(PeterWeylIndex(0, 0, 0), 0.7, tr)
    assert np.allclose(W, np.eye(tr.dim))


@pytest.mark.parametrize("i,ip", [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)])
def test_omega_composition(tr, i, ip):
    assert omega_composition_residual(tr, i, ip) < 1e-8


@pytest.mark.parametrize("g", sorted(FUNDAMENTAL))
def test_omega_adjoint(tr, g):
    i2, j2 = FUNDAMENTAL[g]
    for z in (0.0, 0.5, 1.0, 1.5):
        assert omega_adjoint_residual(tr, PeterWeylIndex(1, i2, j2), z) < 1e-8


def test_mu_half_two_projection_form(tr):
    rep = mu_half_check(tr)
    assert rep.worst() < 1e-8
    assert rep.identity_distance > 0.1


def test_mu_half_idempotent_small_truncation():
    assert mu_half_check(podles_truncation(0.5, 2.5)).idempotent_residual < 1e-9


def test_mu_half_classical_limit():
    assert mu_half_check(podles_truncation(0.999, 1.5)).identity_distance < 1e-3


def test_twisted_commutator_unit_is_zero(tr):
    for mode in ("twisted", "same-z", "untwisted"):
        assert twisted_commutator_norm(tr, "1", 0.0, mode) == 0.0


def test_twisted_sweep_plateau_and_untwisted_contrast():
    Ls = [1.5, 2.5, 3.5, 4.5]
    tw = run_sweep(lambda L: twisted_commutator_norm(podles_truncation(0.5, L), "a", 0.0),
                   Ls, name="tw", parameter_name="L")
    un = run_sweep(lambda L: twisted_commutator_norm(podles_truncation(0.5, L), "a", 0.0,
                                                     mode="untwisted"),
                   Ls, name="un", parameter_name="L")
    assert tw.classification == BOUNDED
    assert un.classification == DIVERGENT
    assert tw.values == pytest.approx([0.3816520186, 0.4692194901, 0.4922177207, 0.4980487777],
                                      rel=1e-9)


def test_same_z_variant_diverges():
    Ls = [1.5, 2.5, 3.5, 4.5]
    rep = run_sweep(lambda L: twisted_commutator_norm(podles_truncation(0.5, L), "a", 0.0,
                                                      mode="same-z"),
                    Ls, name="same-z", parameter_name="L")
    assert rep.classification == DIVERGENT
