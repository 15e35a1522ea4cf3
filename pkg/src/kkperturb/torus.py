"""Noncommutative torus at Fourier truncation, and a circle model.

The basis is ``e_{m,n} = U^m V^n`` with ``|m|, |n| <= N`` and ``V U = lam U V``,
``lam = exp(2 pi i theta)``. Products are reduced with ``V^b U^m = lam^{bm} U^m V^b``,
so

* left ``U``:  ``e_{m,n} -> e_{m+1,n}``
* left ``V``:  ``e_{m,n} -> lam^m e_{m,n+1}``
* right ``U``: ``e_{m,n} -> lam^n e_{m+1,n}``
* right ``V``: ``e_{m,n} -> e_{m,n+1}``

Images outside the box are dropped. Every operator used for the conformal
sweep preserves ``n``, so the sweep is evaluated one ``n``-fiber at a time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .opcore import HermitianOperator, operator_norm, profile_from_values, SingularProfile
from .perturb import ConformalFactor
from .transforms import bounded_transform
from .triples import TruncatedTriple

DEFAULT_THETA = (np.sqrt(5.0) - 1.0) / 2.0
DEFAULT_TAU = 1j
# k = 2 + (U + U*)/2, acting on the right
DEFAULT_K: Dict[Tuple[int, int], complex] = {(0, 0): 2.0, (1, 0): 0.5, (-1, 0): 0.5}

_WORD = {"U": (1, 0), "V": (0, 1), "U*": (-1, 0), "V*": (0, -1)}


class ParameterError(ValueError):
    """A geometric parameter is outside its admissible range."""


@dataclass(frozen=True)
class TorusBasis:
    N: int
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N}")

    @property
    def side(self) -> int:
        return 2 * self.N + 1

    @property
    def dim(self) -> int:
        return self.side ** 2

    @property
    def lam(self) -> complex:
        return np.exp(2j * np.pi * self.theta)

    def index(self, m, n):
        """Position of ``e_{m,n}``; ordered by ``n`` first so fibers are contiguous."""
        return (np.asarray(n) + self.N) * self.side + (np.asarray(m) + self.N)

    def coords(self) -> Tuple[np.ndarray, np.ndarray]:
        k = np.arange(self.dim)
        return k % self.side - self.N, k // self.side - self.N

    def interior(self, depth: int) -> np.ndarray:
        m, n = self.coords()
        r = self.N - depth
        return (np.abs(m) <= r) & (np.abs(n) <= r)


def phase_power(theta: float, k) -> np.ndarray:
    """``exp(2 pi i theta k)`` for integer ``k``, reduced mod 1 before exponentiating."""
    k = np.asarray(k)
    frac = np.mod(theta * k, 1.0)
    return np.exp(2j * np.pi * frac)


def _monomial(basis: TorusBasis, p: int, r: int, side: str) -> np.ndarray:
    """Left or right multiplication by ``U^p V^r`` on the truncation."""
    m, n = basis.coords()
    if side == "left":
        # U^p V^r U^m V^n = lam^{r m} U^{p+m} V^{r+n}
        phase = phase_power(basis.theta, r * m)
    elif side == "right":
        # U^m V^n U^p V^r = lam^{n p} U^{m+p} V^{n+r}
        phase = phase_power(basis.theta, n * p)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    m2, n2 = m + p, n + r
    keep = (np.abs(m2) <= basis.N) & (np.abs(n2) <= basis.N)
    M = np.zeros((basis.dim, basis.dim), dtype=complex)
    cols = np.flatnonzero(keep)
    M[basis.index(m2[keep], n2[keep]), cols] = phase[keep]
    return M


def torus_left_mult(g: str, basis: TorusBasis) -> np.ndarray:
    """Left multiplication by ``U``, ``V``, ``U*`` or ``V*``."""
    if g in ("U", "V"):
        return _monomial(basis, *_WORD[g], "left")
    if g in ("U*", "V*"):
        return torus_left_mult(g[0], basis).conj().T
    raise ValueError(f"unknown generator {g!r}")


def torus_right_mult(g: str, basis: TorusBasis) -> np.ndarray:
    """Right multiplication by ``U``, ``V``, ``U*`` or ``V*``."""
    if g in ("U", "V"):
        return _monomial(basis, *_WORD[g], "right")
    if g in ("U*", "V*"):
        return torus_right_mult(g[0], basis).conj().T
    raise ValueError(f"unknown generator {g!r}")


def right_multiplier(basis: TorusBasis, k_spec: Mapping[Tuple[int, int], complex]) -> np.ndarray:
    """Right multiplication by ``k = sum c_{pr} U^p V^r``."""
    K = np.zeros((basis.dim, basis.dim), dtype=complex)
    for (p, r), c in k_spec.items():
        K += c * _monomial(basis, p, r, "right")
    return K


def _check_tau(tau: complex):
    if not np.imag(tau) > 0:
        raise ParameterError(f"tau must have positive imaginary part, got {tau}")


def _offdiag(top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    n = top.shape[0]
    Z = np.zeros((n, n), dtype=complex)
    return np.block([[Z, top], [bottom, Z]])


def _spinor(M: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(2), M)


def torus_derivations(basis: TorusBasis) -> Tuple[np.ndarray, np.ndarray]:
    m, n = basis.coords()
    return np.diag(m.astype(float)), np.diag(n.astype(float))


def torus_dirac(basis: TorusBasis, tau: complex = DEFAULT_TAU) -> TruncatedTriple:
    """Dirac operator ``[[0, d1 + tau d2], [d1 + conj(tau) d2, 0]]`` on ``L^2 (x) C^2``.

    Generators are left multiplications by ``U, V, U*, V*`` doubled over the
    spinor index; the interior mask is the depth-1 box.
    """
    _check_tau(tau)
    d1, d2 = torus_derivations(basis)
    D = _offdiag(d1 + tau * d2, d1 + np.conj(tau) * d2)
    gens = {g: _spinor(torus_left_mult(g, basis)) for g in ("U", "V", "U*", "V*")}
    mask = np.tile(basis.interior(1), 2)
    return TruncatedTriple(HermitianOperator(D), gens, mask,
                           f"torus N={basis.N} theta={basis.theta:.6g} tau={tau}")


@dataclass(frozen=True)
class TorusConformalPair:
    """The triple for ``D``, the triple for ``k D k`` and ``mu = k`` (right multiplier)."""

    base: TruncatedTriple
    perturbed: TruncatedTriple
    mu: ConformalFactor
    D_k2: np.ndarray
    identity_residual: float

    def __iter__(self):
        return iter((self.base, self.perturbed, self.mu))


def _identity_blocks(dtau: np.ndarray, dtaubar: np.ndarray, K: np.ndarray):
    """``D_{k^2}``, ``k D k`` and the commutator block matrix."""
    K2 = K @ K
    D_k2 = _offdiag(K2 @ dtau, dtaubar @ K2)
    kDk = _offdiag(K @ dtau @ K, K @ dtaubar @ K)
    comm = _offdiag(-K @ (dtau @ K - K @ dtau), (dtaubar @ K - K @ dtaubar) @ K)
    return D_k2, kDk, comm


def torus_conformal_pair(basis: TorusBasis, tau: complex = DEFAULT_TAU,
                         k_spec: Mapping[Tuple[int, int], complex] = DEFAULT_K,
                         depth: int = 1) -> TorusConformalPair:
    """Conformal pair ``D -> k D k`` with ``k`` acting by right multiplication.

    The identity ``D_{k^2} - k D k = [[0, -k[d, k]], [[d*, k] k, 0]]`` is
    evaluated on the interior box of the given depth.

    Raises
    ------
    ParameterError
        If the truncated multiplier is not Hermitian positive with smallest
        eigenvalue above ``1e-6``.
    """
    _check_tau(tau)
    K = right_multiplier(basis, k_spec)
    if operator_norm(K - K.conj().T) > 1e-12 * max(1.0, operator_norm(K)):
        raise ParameterError("k must be self-adjoint")
    K = 0.5 * (K + K.conj().T)
    kmin = float(np.linalg.eigvalsh(K)[0])
    if kmin <= 1e-6:
        raise ParameterError(f"k is not invertible at truncation (min eigenvalue {kmin:.3e})")
    base = torus_dirac(basis, tau)
    d1, d2 = torus_derivations(basis)
    dtau, dtaubar = d1 + tau * d2, d1 + np.conj(tau) * d2
    D_k2, kDk, comm = _identity_blocks(dtau, dtaubar, K)
    mask = np.tile(basis.interior(depth), 2)
    idx = np.flatnonzero(mask)
    R = (D_k2 - kDk - comm)[np.ix_(idx, idx)]
    residual = operator_norm(R)
    perturbed = TruncatedTriple(HermitianOperator(kDk), base.generators, base.interior_mask,
                                base.label + " conformal")
    mu = ConformalFactor(_spinor(K))
    return TorusConformalPair(base, perturbed, mu, D_k2, residual)


# -- fiberwise evaluation ---------------------------------------------------------

def _require_fiber_k(k_spec):
    for (p, r) in k_spec:
        if r != 0:
            raise ParameterError("fiberwise evaluation needs k to be a polynomial in U only")


def fiber_operators(N: int, n: int, theta: float, tau: complex,
                    k_spec: Mapping[Tuple[int, int], complex] = DEFAULT_K):
    """Blocks of ``D``, left ``U`` and ``k`` (all spinor-doubled) on the fiber ``n``.

    The fiber basis is ``e_{m,n}`` for ``m = -N..N`` in each spinor component.
    """
    _require_fiber_k(k_spec)
    side = 2 * N + 1
    m = np.arange(-N, N + 1)
    d = m + tau * n
    D = _offdiag(np.diag(d), np.diag(np.conj(d)))
    LU = np.eye(side, k=-1, dtype=complex)
    K = np.zeros((side, side), dtype=complex)
    for (p, _), c in k_spec.items():
        K += c * phase_power(theta, n * p) * np.eye(side, k=-p, dtype=complex)
    K = 0.5 * (K + K.conj().T)
    return D, _spinor(LU), _spinor(K)


def _fiber_difference(N, n, theta, tau, k_spec):
    D, LU, K = fiber_operators(N, n, theta, tau, k_spec)
    H = HermitianOperator(D)
    Hk = HermitianOperator(K @ D @ K)
    diff = bounded_transform(Hk).matrix - bounded_transform(H).matrix
    return H, LU, K, diff


def torus_conformal_observable(N: int, theta: float = DEFAULT_THETA, tau: complex = DEFAULT_TAU,
                               beta: float = 0.5,
                               k_spec: Mapping[Tuple[int, int], complex] = DEFAULT_K) -> float:
    """``||(F_{kDk} - F_D) U k <D>^beta||`` as a maximum over ``n``-fibers."""
    _check_tau(tau)
    best = 0.0
    for n in range(-N, N + 1):
        H, LU, K, diff = _fiber_difference(N, n, theta, tau, k_spec)
        X = diff @ LU @ K
        if beta != 0.0:
            X = X @ H.bracket(beta)
        best = max(best, operator_norm(X))
    return best


def torus_difference_profile(N: int, theta: float = DEFAULT_THETA, tau: complex = DEFAULT_TAU,
                             k_spec: Mapping[Tuple[int, int], complex] = DEFAULT_K) -> SingularProfile:
    """Singular values of ``(F_{kDk} - F_D) U``, pooled over fibers."""
    vals: List[np.ndarray] = []
    for n in range(-N, N + 1):
        _, LU, _, diff = _fiber_difference(N, n, theta, tau, k_spec)
        vals.append(np.linalg.svd(diff @ LU, compute_uv=False))
    return profile_from_values(np.concatenate(vals))


def torus_identity_residual(N: int, theta: float = DEFAULT_THETA, tau: complex = DEFAULT_TAU,
                            k_spec: Mapping[Tuple[int, int], complex] = DEFAULT_K,
                            depth: int = 1) -> float:
    """Fiberwise ``||D_{k^2} - k D k - [commutator block]||`` on the interior box."""
    worst = 0.0
    for n in range(-(N - depth), N - depth + 1):
        D, _, K = fiber_operators(N, n, theta, tau, k_spec)
        side = 2 * N + 1
        dtau, dtaubar = D[:side, side:], D[side:, :side]
        k = K[:side, :side]
        D_k2, kDk, comm = _identity_blocks(dtau, dtaubar, k)
        keep = np.abs(np.arange(-N, N + 1)) <= N - depth
        idx = np.flatnonzero(np.tile(keep, 2))
        worst = max(worst, operator_norm((D_k2 - kDk - comm)[np.ix_(idx, idx)]))
    return worst


def resolvent_profile(basis: TorusBasis, tau: complex = DEFAULT_TAU) -> SingularProfile:
    """Singular values of ``(1 + D^2)^-1``, read off from ``|m + tau n|^2``."""
    m, n = basis.coords()
    w = 1.0 / (1.0 + np.abs(m + tau * n) ** 2)
    return profile_from_values(np.concatenate([w, w]))


# -- word reduction, used as an oracle for the trace ------------------------------

def reduce_word(word: Sequence[str], theta: float) -> Tuple[complex, int, int]:
    """Write a word in ``U, V, U*, V*`` as ``phase * U^m V^n``."""
    phase_exp, m, n = 0, 0, 0
    for g in word:
        p, r = _WORD[g]
        # U^m V^n U^p V^r = lam^{n p} U^{m+p} V^{n+r}
        phase_exp += n * p
        m, n = m + p, n + r
    return complex(phase_power(theta, phase_exp)), m, n


def word_matrix(word: Sequence[str], basis: TorusBasis) -> np.ndarray:
    M = np.eye(basis.dim, dtype=complex)
    for g in word:
        M = M @ torus_left_mult(g, basis)
    return M


def vacuum_trace(M: np.ndarray, basis: TorusBasis) -> complex:
    """The ``e_{0,0}`` coefficient of ``M e_{0,0}``."""
    k = int(basis.index(0, 0))
    return complex(M[k, k])


# -- circle model ------------------------------------------------------------------

def circle_dirac(N: int) -> HermitianOperator:
    return HermitianOperator.diag(np.arange(-N, N + 1, dtype=float))


def circle_shift(N: int) -> np.ndarray:
    return np.eye(2 * N + 1, k=-1, dtype=complex)


@dataclass(frozen=True)
class DilationReport:
    N: int
    kappa: float
    beta: float
    sup_difference: float
    profile: SingularProfile
    weighted_norm: float


def circle_dilation_compare(N: int, kappa: float, beta: float) -> DilationReport:
    """Compare ``F_D`` and ``F_{kappa D}`` on ``D = diag(-N..N)``."""
    if not kappa > 0:
        raise ParameterError("kappa must be positive")
    D = circle_dirac(N)
    Dk = HermitianOperator(kappa * D.matrix)
    diff = bounded_transform(Dk).matrix - bounded_transform(D).matrix
    prof = profile_from_values(np.linalg.svd(diff @ circle_shift(N), compute_uv=False))
    weighted = operator_norm(diff @ D.bracket(beta)) if beta != 0.0 else operator_norm(diff)
    return DilationReport(N, kappa, beta, operator_norm(diff), prof, weighted)
