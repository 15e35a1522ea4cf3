"""Dense complex Hermitian linear algebra.

Everything downstream (transforms, perturbation checks, geometric models)
goes through this module: eigendecompositions, functional calculus, norms,
singular value profiles and positive-semidefiniteness margins.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class NotHermitianError(ValueError):
    """Input deviates from its adjoint by more than the Hermitian tolerance."""


class DomainError(ValueError):
    """A function is undefined or non-finite somewhere on a spectrum."""


class ConvergenceError(RuntimeError):
    """The eigensolver did not produce an acceptable decomposition."""


@dataclass(frozen=True)
class ToleranceConfig:
    hermitian_tol: float = 1e-8
    reconstruction_tol: float = 1e-9
    inequality_slack: float = 1e-9
    quadrature_rel_tol: float = 1e-6

    def __post_init__(self):
        for name in ("hermitian_tol", "reconstruction_tol",
                     "inequality_slack", "quadrature_rel_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if self.inequality_slack > 1e-6:
            raise ValueError("inequality_slack must not exceed 1e-6")


DEFAULT_TOL = ToleranceConfig()

# Matrices at least this large are scanned for block-diagonal structure
# before diagonalisation.
_BLOCK_SCAN_MIN_DIM = 48


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a square, finite complex ndarray."""
    A = np.asarray(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _frob(A: np.ndarray) -> float:
    return float(np.linalg.norm(A))


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending real eigenvalues and a unitary matrix of eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T

    def apply(self, fvalues: np.ndarray) -> np.ndarray:
        return (self.vectors * fvalues) @ self.vectors.conj().T


class HermitianOperator:
    """A finite Hermitian matrix standing in for a self-adjoint operator.

    The input is symmetrised as ``(M + M*)/2``; the asymmetry that was removed
    is kept in :attr:`asymmetry`. Construction fails only when the asymmetry
    exceeds ``hermitian_tol`` relative to ``max(1, ||M||_F)``.
    """

    def __init__(self, matrix, tol: ToleranceConfig = DEFAULT_TOL):
        A = as_matrix(matrix)
        asym = _frob(A - A.conj().T)
        scale = max(1.0, _frob(A))
        if asym > tol.hermitian_tol * scale:
            raise NotHermitianError(
                f"asymmetry ||M - M*||_F = {asym:.3e} exceeds "
                f"{tol.hermitian_tol:.1e} * {scale:.3e}")
        H = 0.5 * (A + A.conj().T)
        H.setflags(write=False)
        self._matrix = H
        self.asymmetry = asym
        self.tol = tol
        self._eig: Optional[EigenDecomposition] = None

    @classmethod
    def diag(cls, values, tol: ToleranceConfig = DEFAULT_TOL) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=float)), tol)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def eig(self) -> EigenDecomposition:
        if self._eig is None:
            self._eig = hermitian_eig(self)
        return self._eig

    def func(self, f: Callable) -> np.ndarray:
        """Matrix ``f(H)`` as a plain ndarray."""
        e = self.eig()
        return e.apply(_evaluate(f, e.values))

    def bracket(self, power: float = 1.0) -> np.ndarray:
        """``<H>^power = (1 + H^2)^(power/2)``."""
        return self.func(lambda x: (1.0 + x * x) ** (0.5 * power))

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


def _evaluate(f: Callable, values: np.ndarray) -> np.ndarray:
    try:
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.asarray(f(values), dtype=float)
        if out.shape != values.shape:
            raise ValueError
    except (TypeError, ValueError):
        out = np.array([float(f(v)) for v in values])
    bad = ~np.isfinite(out)
    if np.any(bad):
        x = values[np.argmax(bad)]
        raise DomainError(f"function is not finite at eigenvalue {x!r}")
    return out


def _blocks(A: np.ndarray):
    n = A.shape[0]
    if n < _BLOCK_SCAN_MIN_DIM:
        return [np.arange(n)]
    pattern = csr_matrix(np.abs(A) > 0)
    count, labels = connected_components(pattern, directed=False)
    if count == 1:
        return [np.arange(n)]
    return [np.flatnonzero(labels == k) for k in range(count)]


def _eigh_block(B: np.ndarray):
    try:
        return np.linalg.eigh(B)
    except np.linalg.LinAlgError:
        # Fall back to the bisection/inverse-iteration driver.
        return scipy.linalg.eigh(B, driver="evx")


def hermitian_eig(H: HermitianOperator) -> EigenDecomposition:
    """Eigendecomposition ``H = U diag(w) U*`` with ``w`` ascending.

    Block-diagonal structure (up to permutation) is detected from the
    sparsity pattern and each block is diagonalised separately; the result is
    the same decomposition, only cheaper.
    """
    A = H.matrix
    n = A.shape[0]
    values = np.empty(n)
    vectors = np.zeros((n, n), dtype=complex)
    for idx in _blocks(A):
        B = A[np.ix_(idx, idx)]
        try:
            w, V = _eigh_block(B)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise ConvergenceError(
                f"eigensolver failed on a block of size {len(idx)} "
                f"(||B||_F = {_frob(B):.3e}): {exc}") from exc
        residual = _frob(B - (V * w) @ V.conj().T)
        if residual > H.tol.reconstruction_tol * (1.0 + _frob(B)):
            raise ConvergenceError(
                f"eigendecomposition residual {residual:.3e} above tolerance")
        values[idx] = w
        vectors[np.ix_(idx, idx)] = V
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], vectors[:, order])


def apply_function(H: HermitianOperator, f: Callable) -> HermitianOperator:
    """Functional calculus ``U f(Lambda) U*`` for a real-valued ``f``."""
    return HermitianOperator(H.func(f), H.tol)


def operator_norm(M) -> float:
    """Largest singular value."""
    A = np.asarray(M, dtype=complex)
    if A.size == 0:
        return 0.0
    if A.ndim != 2:
        raise ValueError("operator_norm expects a 2-d array")
    if not np.any(A):
        return 0.0
    return float(np.linalg.norm(A, 2))


@dataclass(frozen=True)
class SingularProfile:
    """Nonincreasing singular values plus the fitted log-log decay slope.

    ``decay_rate`` is ``None`` when fewer than two positive singular values
    with index ``k >= 2`` exist (in particular for 1x1 input).
    """

    values: np.ndarray
    decay_rate: Optional[float]


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    lx = lx - lx.mean()
    denom = float(lx @ lx)
    if denom == 0.0:
        return 0.0
    return float(lx @ (ly - ly.mean()) / denom)


def singular_profile(M) -> SingularProfile:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("singular_profile expects a non-empty 2-d array")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    s = np.linalg.svd(A, compute_uv=False)
    return profile_from_values(s)


def profile_from_values(s) -> SingularProfile:
    """Build a :class:`SingularProfile` from an unsorted list of singular values."""
    s = np.sort(np.abs(np.asarray(s, dtype=float)))[::-1]
    if s.size < 2:
        return SingularProfile(s, None)
    k = np.arange(1, s.size + 1)
    floor = s[0] * s.size * np.finfo(float).eps
    keep = (k >= 2) & (s > floor)
    if np.count_nonzero(keep) < 2:
        return SingularProfile(s, None)
    return SingularProfile(s, loglog_slope(k[keep], s[keep]))


def hermitian_part(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Symmetrise ``M`` after checking its asymmetry against ``max(1, ||M||_F)``."""
    A = as_matrix(M)
    asym = _frob(A - A.conj().T)
    if asym > tol.hermitian_tol * max(1.0, _frob(A)):
        raise NotHermitianError(f"asymmetry ||M - M*||_F = {asym:.3e}")
    return 0.5 * (A + A.conj().T)


def psd_margin(M, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of the symmetrised ``M``.

    ``A <= B`` is checked as ``psd_margin(B - A) >= -slack``.
    """
    H = hermitian_part(M, tol)
    return float(np.linalg.eigvalsh(H)[0])


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (G + G.conj().T)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_positive(rng: np.random.Generator, n: int, cond: float) -> np.ndarray:
    """Positive definite matrix with spectrum spread over ``[1, cond]``."""
    U = random_unitary(rng, n)
    w = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    w[0], w[-1] = 1.0, cond
    return (U * w) @ U.conj().T


def random_invertible(rng: np.random.Generator, n: int, cond: float,
                      scale: float = 1.0) -> np.ndarray:
    """Matrix ``U diag(s) V*`` with singular values in ``[scale, scale*cond]``."""
    U = random_unitary(rng, n)
    V = random_unitary(rng, n)
    s = scale * np.exp(rng.uniform(0.0, np.log(cond), size=n))
    if n > 1:
        s[0], s[-1] = scale, scale * cond
    return (U * s) @ V.conj().T
