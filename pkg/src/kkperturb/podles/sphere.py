"""The Podles sphere spectral triple at Peter-Weyl truncation ``l <= L``.

Operators are represented in the orthonormal basis ``e_u = t_u / ||t_u||`` of
the Haar inner product ``<x|y> = h(x* y)``. Multiplication operators are
assembled from exact products in :mod:`.algebra`; images in the shell
``l = L + 1/2`` are computed and then dropped, so every identity is checked
on an interior ``l <= L - depth/2`` where ``depth`` is the word length used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..opcore import HermitianOperator, operator_norm
from ..triples import TruncatedTriple
from .algebra import ONE, GENERATORS, Elem, PeterWeyl, PWKey, SUq2, add_into, as_fraction


class LadderError(IndexError):
    """A ladder coefficient was requested off the weight ladder."""


def q_number(x, q) -> float:
    """``[x]_q = (q^x - q^-x) / (q - q^-1)`` for real ``x``."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    x = float(x)
    return (q ** x - q ** -x) / (q - 1.0 / q)


def kappa(l, k, q) -> float:
    """``sqrt([l + 1/2]_q^2 - [k - 1/2]_q^2)``."""
    rad = q_number(float(l) + 0.5, q) ** 2 - q_number(float(k) - 0.5, q) ** 2
    if rad < 0:
        if rad > -1e-12 * q_number(float(l) + 0.5, q) ** 2:
            return 0.0
        raise LadderError(f"negative radicand for l = {l}, k = {k}")
    return float(np.sqrt(rad))


@dataclass(frozen=True, order=True)
class PeterWeylIndex:
    """``(l, i, j)`` stored as doubled integers."""

    l2: int
    i2: int
    j2: int

    def __post_init__(self):
        if self.l2 < 0 or abs(self.i2) > self.l2 or abs(self.j2) > self.l2:
            raise ValueError(f"invalid Peter-Weyl index {self}")
        if (self.l2 - self.i2) % 2 or (self.l2 - self.j2) % 2:
            raise ValueError(f"l - i and l - j must be integers: {self}")

    @classmethod
    def of(cls, l, i, j) -> "PeterWeylIndex":
        return cls(int(round(2 * l)), int(round(2 * i)), int(round(2 * j)))

    @property
    def key(self) -> PWKey:
        return (self.l2, self.i2, self.j2)

    @property
    def l(self) -> float:
        return self.l2 / 2

    @property
    def i(self) -> float:
        return self.i2 / 2

    @property
    def j(self) -> float:
        return self.j2 / 2


# generators as matrix elements of the fundamental corepresentation
FUNDAMENTAL = {"a": (-1, -1), "b": (-1, 1), "c": (1, -1), "d": (1, 1)}


class PodlesTruncation:
    """Peter-Weyl truncation ``l <= L`` of ``O(SU_q(2))`` with Haar geometry.

    Parameters
    ----------
    q : float or Fraction
        Deformation parameter in ``(0, 1)``; converted to an exact rational.
    L : float
        Largest spin kept (integer or half-integer).
    """

    def __init__(self, q, L):
        self.alg = SUq2(q)
        self.q = float(self.alg.q)
        self.L2 = int(round(2 * L))
        if self.L2 < 0 or abs(self.L2 - 2 * L) > 1e-12:
            raise ValueError(f"L must be a nonnegative half-integer, got {L}")
        self.pw = PeterWeyl(self.alg, self.L2 + 1)
        self.basis: List[PWKey] = sorted(
            (k for k in self.pw.keys() if k[0] <= self.L2))
        self.pos: Dict[PWKey, int] = {k: n for n, k in enumerate(self.basis)}
        self.eta = {k: float(self.pw.norm2(k)) for k in self.pw.keys()}
        self.cnorm = self._normalisation()
        # ||t_u||^2, the Haar weight of each basis element
        self.haar_weights = np.array([self.cnorm[k] ** 2 * self.eta[k] for k in self.basis])
        l2 = np.array([k[0] for k in self.basis])
        j2 = np.array([k[2] for k in self.basis])
        self.l2 = l2
        self.S_plus = np.flatnonzero(j2 == 1)
        self.S_minus = np.flatnonzero(j2 == -1)
        self._cache: Dict[Tuple, np.ndarray] = {}

    @property
    def L(self) -> float:
        return self.L2 / 2

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _normalisation(self) -> Dict[PWKey, float]:
        q = self.q
        c: Dict[PWKey, float] = {}
        for l2 in range(self.L2 + 2):
            l = l2 / 2
            c[(l2, -l2, -l2)] = 1.0
            for i2 in range(-l2, l2, 2):
                i = i2 / 2
                c[(l2, i2 + 2, -l2)] = c[(l2, i2, -l2)] / (q ** (-0.5 - i) * kappa(l, i + 1, q))
            for i2 in range(-l2, l2 + 1, 2):
                for j2 in range(-l2, l2, 2):
                    j = j2 / 2
                    c[(l2, i2, j2 + 2)] = c[(l2, i2, j2)] / (q ** (0.5 + j) * kappa(l, j + 1, q))
        return c

    def index(self, l, i, j) -> int:
        return self.pos[PeterWeylIndex.of(l, i, j).key]

    @property
    def vacuum(self) -> int:
        return self.pos[(0, 0, 0)]

    def interior(self, depth: int) -> np.ndarray:
        """Mask of basis vectors with ``l <= L - depth/2``."""
        return self.l2 <= self.L2 - depth

    # -- algebra elements ----------------------------------------------------------

    def t(self, l, i, j) -> Tuple[Elem, float]:
        """``t^l_{ij}`` as ``(s, c)`` with ``t = c s`` exactly in ``s``."""
        key = PeterWeylIndex.of(l, i, j).key
        return self.pw.s[key], self.cnorm[key]

    def generator(self, name: str) -> Elem:
        return {GENERATORS[name]: Fraction(1)}

    def to_vector(self, x: Elem) -> np.ndarray:
        """Coordinates of an algebra element in the orthonormal basis."""
        v = np.zeros(self.dim)
        for key, coef in self.pw.expand(x).items():
            if key[0] > self.L2:
                raise ValueError("element does not fit in the truncation")
            v[self.pos[key]] += float(coef) * np.sqrt(self.eta[key])
        return v

    def _operator(self, action: Callable[[Elem], Elem]) -> np.ndarray:
        M = np.zeros((self.dim, self.dim))
        for v, kv in enumerate(self.basis):
            y = action(self.pw.s[kv])
            sv = np.sqrt(self.eta[kv])
            for ku, coef in self.pw.expand(y).items():
                u = self.pos.get(ku)
                if u is not None:
                    M[u, v] += float(coef) * np.sqrt(self.eta[ku]) / sv
        return M

    def lmult(self, x: Elem) -> np.ndarray:
        """Left multiplication by ``x`` with the overflow shell dropped."""
        return self._operator(lambda y: self.alg.mul(x, y))

    def rmult(self, x: Elem) -> np.ndarray:
        return self._operator(lambda y: self.alg.mul(y, x))

    def _cached(self, key, build):
        if key not in self._cache:
            M = build()
            M.setflags(write=False)
            self._cache[key] = M
        return self._cache[key]

    def gen_op(self, g: str, side: str = "left") -> np.ndarray:
        if g not in GENERATORS:
            raise ValueError(f"unknown generator {g!r}")
        if side == "left":
            return self._cached(("L", g), lambda: self.lmult(self.generator(g)))
        if side == "right":
            return self._cached(("R", g), lambda: self.rmult(self.generator(g)))
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def t_op(self, l, i, j, side: str = "left", star: bool = False) -> np.ndarray:
        """Multiplication by ``t^l_{ij}`` or its adjoint."""
        key = PeterWeylIndex.of(l, i, j).key

        def build():
            s, c = self.t(l, i, j)
            x = self.alg.star(s) if star else s
            M = self.lmult(x) if side == "left" else self.rmult(x)
            return c * M

        return self._cached(("t", key, side, star), build)

    def star_matrix(self) -> np.ndarray:
        """Real-linear map ``x -> x*`` on real coordinate vectors."""
        return self._cached(("star",), lambda: self._operator(self.alg.star))

    # -- derivations and K actions ----------------------------------------------------

    def _ladder(self, step: int) -> np.ndarray:
        M = np.zeros((self.dim, self.dim))
        q = self.q
        for v, (l2, i2, j2) in enumerate(self.basis):
            k2 = j2 + 2 * step
            if abs(k2) > l2:
                continue
            u = self.pos[(l2, i2, k2)]
            # E raises j with kappa_{j+1}; F lowers j with kappa_j
            kap = kappa(l2 / 2, (j2 / 2 + 1) if step > 0 else j2 / 2, q)
            ratio = np.sqrt(self.haar_weights[u] / self.haar_weights[v])
            M[u, v] = kap * ratio
        return M

    @property
    def dE(self) -> np.ndarray:
        return self._cached(("dE",), lambda: self._ladder(+1))

    @property
    def dF(self) -> np.ndarray:
        return self._cached(("dF",), lambda: self._ladder(-1))

    def K_left(self, power: float = 1.0) -> np.ndarray:
        """``K^power ->`` : multiplies ``t^l_{ij}`` by ``q^{power j}``."""
        j = np.array([k[2] for k in self.basis]) / 2
        return np.diag(self.q ** (power * j))

    def K_right(self, power: float = 1.0) -> np.ndarray:
        """``<- K^power`` : multiplies ``t^l_{ij}`` by ``q^{power i}``."""
        i = np.array([k[1] for k in self.basis]) / 2
        return np.diag(self.q ** (power * i))


@lru_cache(maxsize=16)
def podles_truncation(q, L) -> PodlesTruncation:
    return PodlesTruncation(q, L)


# -- operations --------------------------------------------------------------------

def build_podles_dirac(tr: PodlesTruncation) -> TruncatedTriple:
    """``D = [[0, dE], [dF, 0]]`` on ``S+ (+) S-`` in the orthonormal basis.

    Generators are the left multiplications by ``a, b, c, d`` compressed to
    the spinor sectors; the interior is ``l <= L - 1/2``.
    """
    if tr.L2 < 1:
        raise ValueError("need L >= 1/2")
    P, M = tr.S_plus, tr.S_minus
    idx = np.concatenate([P, M])
    dE = tr.dE[np.ix_(P, M)]
    dF = tr.dF[np.ix_(M, P)]
    Z1 = np.zeros((len(P), len(P)))
    Z2 = np.zeros((len(M), len(M)))
    D = np.block([[Z1, dE], [dF, Z2]])
    gens = {g: tr.gen_op(g)[np.ix_(idx, idx)] for g in GENERATORS}
    mask = tr.interior(1)[idx]
    return TruncatedTriple(HermitianOperator(D), gens, mask,
                           f"podles q={tr.q:g} L={tr.L:g}")


def spinor_grading(tr: PodlesTruncation) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(len(tr.S_plus)), -np.ones(len(tr.S_minus))]))


def k_actions(tr: PodlesTruncation):
    """``(K ->, K^-1 ->, <- K, <- K^-1)`` as diagonal matrices."""
    return tr.K_left(1.0), tr.K_left(-1.0), tr.K_right(1.0), tr.K_right(-1.0)


def generator_mult(g: str, side: str, tr: PodlesTruncation) -> np.ndarray:
    return tr.gen_op(g, side)


def haar_state(x: np.ndarray, tr: PodlesTruncation) -> float:
    """Coefficient of the unit in ``x 1``."""
    v = tr.vacuum
    return float(np.asarray(x)[v, v])


def omega_action(idx: PeterWeylIndex, z: float, tr: PodlesTruncation,
                 star: bool = False) -> np.ndarray:
    """``omega_z(t^l_{ij})`` or, with ``star``, ``omega_z(t^l_{ij}*)``.

    ``omega_z(t_{ij}) = sum_k q^{-2zk} L(t_{ik}) R(t_{jk}*)`` and
    ``omega_z(t_{ij}*) = sum_k q^{2((z-1)k + j)} L(t_{ik}*) R(t_{jk})``.
    """
    if idx.l2 > tr.L2:
        raise ValueError("spin exceeds the truncation")
    l, i, j = idx.l, idx.i, idx.j
    q = tr.q
    out = np.zeros((tr.dim, tr.dim))
    for k2 in range(-idx.l2, idx.l2 + 1, 2):
        k = k2 / 2
        if not star:
            w = q ** (-2 * z * k)
            out += w * tr.t_op(l, i, k, "left") @ tr.t_op(l, j, k, "right", star=True)
        else:
            w = q ** (2 * ((z - 1) * k + j))
            out += w * tr.t_op(l, i, k, "left", star=True) @ tr.t_op(l, j, k, "right")
    return out


def _restrict(M, rows, cols) -> np.ndarray:
    return M[np.ix_(np.flatnonzero(rows), np.flatnonzero(cols))]


# -- identity checks ----------------------------------------------------------------

_RELATIONS = {
    "ab=qba": (("a", "b"), ("b", "a"), "q", None),
    "ac=qca": (("a", "c"), ("c", "a"), "q", None),
    "bd=qdb": (("b", "d"), ("d", "b"), "q", None),
    "cd=qdc": (("c", "d"), ("d", "c"), "q", None),
    "bc=cb": (("b", "c"), ("c", "b"), "1", None),
    "ad=1+qbc": (("a", "d"), ("b", "c"), "q", "one"),
    "da=1+q^-1bc": (("d", "a"), ("b", "c"), "1/q", "one"),
}


def relation_residuals(tr: PodlesTruncation) -> Dict[str, float]:
    """Residual norms of the defining relations on the depth-2 interior."""
    q = tr.q
    scal = {"q": q, "1": 1.0, "1/q": 1.0 / q}
    L = {g: tr.gen_op(g) for g in GENERATORS}
    mask = tr.interior(2)
    full = np.ones(tr.dim, dtype=bool)
    out = {}
    for name, (lhs, rhs, s, const) in _RELATIONS.items():
        R = L[lhs[0]] @ L[lhs[1]] - scal[s] * L[rhs[0]] @ L[rhs[1]]
        if const:
            R = R - np.eye(tr.dim)
        out[name] = operator_norm(_restrict(R, full, mask))
    return out


def leibniz_residuals(tr: PodlesTruncation) -> Dict[str, float]:
    """``d(g y) - d(g) (K -> y) - (K^-1 -> g) d(y)`` for ``d = dE, dF``."""
    Kl = tr.K_left(1.0)
    mask = tr.interior(1)
    full = np.ones(tr.dim, dtype=bool)
    q = tr.q
    out = {}
    for g, (i2, j2) in FUNDAMENTAL.items():
        i, j = i2 / 2, j2 / 2
        Lg = tr.gen_op(g)
        twisted = q ** (-j) * Lg
        for dname, d, step in (("dE", tr.dE, 1), ("dF", tr.dF, -1)):
            jn = j + step
            if abs(jn) <= 0.5:
                kap = kappa(0.5, j + 1 if step > 0 else j, q)
                Ldg = kap * tr.t_op(0.5, i, jn)
            else:
                Ldg = np.zeros_like(Lg)
            R = d @ Lg - Ldg @ Kl - twisted @ d
            out[f"{dname}:{g}"] = operator_norm(_restrict(R, full, mask))
    return out


def words(length: int) -> List[Tuple[str, ...]]:
    out = [()]
    for _ in range(length):
        out = [w + (g,) for w in out for g in "abcd"]
    return out


def word_element(tr: PodlesTruncation, word: Sequence[str]) -> Elem:
    return tr.alg.mul_many(*[tr.generator(g) for g in word])


def star_relation_residuals(tr: PodlesTruncation, max_len: int = 2) -> Dict[str, float]:
    """``dE(x*) + q dF(x)*`` and ``dF(x*) + q^-1 dE(x)*`` in Haar norm, per word."""
    S = tr.star_matrix()
    q = tr.q
    out = {}
    for n in range(1, max_len + 1):
        for w in words(n):
            x = word_element(tr, w)
            v = tr.to_vector(x)
            vs = tr.to_vector(tr.alg.star(x))
            r1 = tr.dE @ vs + q * (S @ (tr.dF @ v))
            r2 = tr.dF @ vs + (S @ (tr.dE @ v)) / q
            out["".join(w)] = float(max(np.linalg.norm(r1), np.linalg.norm(r2)))
    return out


_MODULAR_SCALE = {"a": -2, "b": 0, "c": 0, "d": 2}


def modular_residual(tr: PodlesTruncation, alpha: Sequence[str], beta: Sequence[str]) -> float:
    """``phi(alpha beta) - phi(beta sigma(alpha))`` with ``sigma = K^2 -> . <- K^2``.

    ``sigma`` scales ``a, b, c, d`` by ``q^-2, 1, 1, q^2``.
    """
    if len(alpha) + len(beta) > tr.L2:
        raise ValueError("words too long for the truncation")

    def op(word):
        M = np.eye(tr.dim)
        for g in word:
            M = M @ tr.gen_op(g)
        return M

    scale = tr.q ** sum(_MODULAR_SCALE[g] for g in alpha)
    lhs = haar_state(op(alpha) @ op(beta), tr)
    rhs = scale * haar_state(op(beta) @ op(alpha), tr)
    return abs(lhs - rhs)


def dirac_symmetry_residual(tr: PodlesTruncation) -> float:
    trip = build_podles_dirac(tr)
    return trip.dirac.asymmetry


def omega_composition_residual(tr: PodlesTruncation, i, ip, l: float = 0.5) -> float:
    """``sum_j omega_0(t_{ij}) omega_1(t_{i'j}*) - L(sum_k q^{2k} t_{ik} t_{i'k}*)``."""
    q = tr.q
    l2 = int(round(2 * l))
    lhs = np.zeros((tr.dim, tr.dim))
    rhs = np.zeros((tr.dim, tr.dim))
    for j2 in range(-l2, l2 + 1, 2):
        j = j2 / 2
        lhs += omega_action(PeterWeylIndex.of(l, i, j), 0.0, tr) @ \
            omega_action(PeterWeylIndex.of(l, ip, j), 1.0, tr, star=True)
        rhs += q ** (2 * j) * tr.t_op(l, i, j) @ tr.t_op(l, ip, j, star=True)
    mask = tr.interior(4 * l2)
    full = np.ones(tr.dim, dtype=bool)
    return operator_norm(_restrict(lhs - rhs, full, mask))


def omega_adjoint_residual(tr: PodlesTruncation, idx: PeterWeylIndex, z: float) -> float:
    """``omega_z(t)^dagger - omega_{2-z}(t*)`` on the interior block."""
    M1 = omega_action(idx, z, tr)
    M2 = omega_action(idx, 2.0 - z, tr, star=True)
    mask = tr.interior(2 * idx.l2)
    return operator_norm(_restrict(M1.T - M2, mask, mask))


@dataclass(frozen=True)
class MuHalfReport:
    display_residual: float
    partition_residual: float
    idempotent_residual: float
    selfadjoint_residual: float
    minimal_polynomial_residual: float
    identity_distance: float

    def worst(self) -> float:
        return max(self.display_residual, self.partition_residual,
                   self.idempotent_residual, self.selfadjoint_residual,
                   self.minimal_polynomial_residual)


def _block(rows) -> np.ndarray:
    return np.block(rows)


def mu_half_check(tr: PodlesTruncation) -> MuHalfReport:
    """The spin-1/2 conformal factor as a two-projection combination.

    ``P_k[i, j] = L(t_{ik}) L(t_{jk}*)`` for ``k = +-1/2``; the combination
    ``q^{1/2} P_+ + q^{-1/2} P_-`` is compared with its expression through
    ``A = -q^-1 bc``, ``B = -q^-1 ab`` and ``B* = cd``.
    """
    if tr.L2 < 3:
        raise ValueError("need L >= 3/2")
    q = tr.q
    n = tr.dim
    I = np.eye(n)
    P = {}
    for k in (0.5, -0.5):
        P[k] = _block([[tr.t_op(0.5, i, k) @ tr.t_op(0.5, jj, k, star=True)
                        for jj in (-0.5, 0.5)] for i in (-0.5, 0.5)])
    Lg = {g: tr.gen_op(g) for g in GENERATORS}
    A = -Lg["b"] @ Lg["c"] / q
    B = -Lg["a"] @ Lg["b"] / q
    Bs = Lg["c"] @ Lg["d"]
    disp = (q ** 0.5 * _block([[q ** 2 * A, -B], [-Bs, I - A]])
            + q ** -0.5 * _block([[I - q ** 2 * A, B], [Bs, A]]))
    mu = q ** 0.5 * P[0.5] + q ** -0.5 * P[-0.5]
    m2 = np.tile(tr.interior(2), 2)
    m4 = np.tile(tr.interior(4), 2)
    full = np.ones(2 * n, dtype=bool)
    I2 = np.eye(2 * n)
    idem = max(operator_norm(_restrict(P[k] @ P[k] - P[k], full, m4)) for k in P)
    sa = max(operator_norm(_restrict(P[k] - P[k].T, m2, m2)) for k in P)
    minpoly = (mu - q ** 0.5 * I2) @ (mu - q ** -0.5 * I2)
    return MuHalfReport(
        display_residual=operator_norm(_restrict(mu - disp, full, m2)),
        partition_residual=operator_norm(_restrict(P[0.5] + P[-0.5] - I2, full, m2)),
        idempotent_residual=idem,
        selfadjoint_residual=sa,
        minimal_polynomial_residual=operator_norm(_restrict(minpoly, full, m4)),
        identity_distance=operator_norm(_restrict(mu - I2, full, m2)),
    )


# -- sweeps ---------------------------------------------------------------------------

def twisted_commutator_norm(tr: PodlesTruncation, g: str, z: float,
                            mode: str = "twisted") -> float:
    """Norm of a commutator of ``dE`` with the action of a generator ``g``.

    ``mode="twisted"``: ``||dE omega_z(g) - omega_{z+1}(g) dE||`` from ``S-``
    (``l <= L - 1``) to ``S+``.

    ``mode="same-z"``: ``||dE omega_z(g) - omega_z(g) dE||`` on the same sectors.

    ``mode="untwisted"``: ``||dE L(g) - L(g) dE||`` on the whole truncated
    Peter-Weyl space with ``l <= L - 1/2``. Left multiplication by a
    generator shifts ``j`` by ``1/2`` and so never maps ``S-`` into ``S+``;
    the comparison is only meaningful before restricting to spinors.

    ``g = "1"`` is the unit, for which every mode gives 0.
    """
    if mode not in ("twisted", "same-z", "untwisted"):
        raise ValueError(f"unknown mode {mode!r}")
    if g == "1":
        return 0.0
    dE = tr.dE
    if mode == "untwisted":
        Lg = tr.gen_op(g)
        C = dE @ Lg - Lg @ dE
        cols = tr.interior(1)
        return operator_norm(C[:, cols]) if cols.any() else 0.0
    rows = np.zeros(tr.dim, dtype=bool)
    rows[tr.S_plus] = True
    cols = np.zeros(tr.dim, dtype=bool)
    cols[tr.S_minus] = True
    cols &= tr.interior(2)
    if not cols.any():
        return 0.0
    i2, j2 = FUNDAMENTAL[g]
    idx = PeterWeylIndex(1, i2, j2)
    W = omega_action(idx, z, tr)
    W1 = omega_action(idx, z + 1.0, tr) if mode == "twisted" else W
    C = dE @ W - W1 @ dE
    return operator_norm(_restrict(C, rows, cols))
