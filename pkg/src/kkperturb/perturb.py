"""Multiplicative perturbation theory at finite truncation.

Norm bounds for inner derivations, fractional-power interpolation, the
conformal resolvent sandwich, bounded-transform differences and the converse
decomposition ``D2 = mu D1 mu* + T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .opcore import (DEFAULT_TOL, HermitianOperator, ToleranceConfig,
                     hermitian_part, loglog_slope, operator_norm, psd_margin)
from .transforms import bounded_transform

COND_CAP = 1e8
DERIVATION_DIM_CAP = 16

PLATEAU_SLOPE = 0.05
DIVERGENT_SLOPE = 0.3


class PreconditionError(ValueError):
    """An input violates a documented precondition."""


class DimensionCapError(ValueError):
    """A dense assembly would exceed the configured dimension cap."""


class ConsistencyError(RuntimeError):
    """An internal identity failed; indicates numerical breakdown."""


def _mat(x) -> np.ndarray:
    return np.asarray(getattr(x, "matrix", x), dtype=complex)


def _herm(D) -> HermitianOperator:
    return D if isinstance(D, HermitianOperator) else HermitianOperator(D)


class ConformalFactor:
    """Invertible matrix ``mu`` with its inverse and condition number.

    Raises
    ------
    PreconditionError
        If ``mu`` is singular or its condition number exceeds ``cond_cap``.
    """

    def __init__(self, mu, mu_inv=None, cond_cap: float = COND_CAP):
        mu = _mat(mu)
        if mu.ndim != 2 or mu.shape[0] != mu.shape[1]:
            raise ValueError("mu must be square")
        s = np.linalg.svd(mu, compute_uv=False)
        if s[-1] == 0.0 or s[0] / s[-1] > cond_cap:
            raise PreconditionError(
                f"conformal factor is singular or too ill-conditioned "
                f"(sigma_min = {s[-1]:.3e}, sigma_max = {s[0]:.3e})")
        n = mu.shape[0]
        if mu_inv is None:
            mu_inv = np.linalg.solve(mu, np.eye(n))
        mu_inv = _mat(mu_inv)
        residual = operator_norm(mu @ mu_inv - np.eye(n))
        if residual > 1e-10:
            raise PreconditionError(f"||mu mu_inv - I|| = {residual:.3e}")
        mu.setflags(write=False)
        mu_inv.setflags(write=False)
        self.mu = mu
        self.mu_inv = mu_inv
        self.norm = float(s[0])
        self.inv_norm = float(1.0 / s[-1])
        self.cond = max(1.0, self.norm * self.inv_norm)

    @classmethod
    def identity(cls, n: int) -> "ConformalFactor":
        return cls(np.eye(n), np.eye(n))

    @classmethod
    def scalar(cls, c: float, n: int) -> "ConformalFactor":
        return cls(c * np.eye(n), np.eye(n) / c)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    def conjugate(self, D) -> HermitianOperator:
        """``mu D mu*``."""
        M = _mat(D)
        return HermitianOperator(self.mu @ M @ self.mu.conj().T, _tol_of(D))

    def __repr__(self):
        return f"ConformalFactor(dim={self.dim}, cond={self.cond:.3g})"


def _tol_of(D) -> ToleranceConfig:
    return getattr(D, "tol", DEFAULT_TOL)


@dataclass(frozen=True)
class InequalityReport:
    """Both sides of an inequality ``lhs <= rhs`` and the verdict."""

    lhs: float
    rhs: float
    holds: bool

    @property
    def gap(self) -> float:
        return self.rhs - self.lhs


def _compare(lhs: float, rhs: float, slack: float) -> InequalityReport:
    return InequalityReport(float(lhs), float(rhs), bool(lhs <= rhs + slack))


# -- inner derivations ------------------------------------------------------

def derivation_matrix(a, b) -> np.ndarray:
    """Matrix of ``x -> a x - x b`` on column-stacked ``x``."""
    a = _mat(a)
    b = _mat(b)
    m, n = a.shape[0], b.shape[0]
    return np.kron(np.eye(n), a) - np.kron(b.T, np.eye(m))


def inner_derivation_norm_exact(a, b, cap: int = DERIVATION_DIM_CAP) -> float:
    """Exact norm of ``x -> a x - x b`` for the Hilbert-Schmidt norm on ``x``.

    For normal ``a`` and ``b`` this equals ``max |lambda_i(a) - lambda_j(b)|``.

    Raises
    ------
    DimensionCapError
        If either side exceeds ``cap``.
    """
    a = _mat(a)
    b = _mat(b)
    if max(a.shape[0], b.shape[0]) > cap:
        raise DimensionCapError(
            f"dimensions {a.shape[0]}, {b.shape[0]} exceed the cap {cap}")
    return operator_norm(derivation_matrix(a, b))


def inner_derivation_norm_power(a, b, rng: np.random.Generator,
                                iterations: int = 500, rtol: float = 1e-12) -> float:
    """Power iteration on ``Phi* Phi`` with ``Phi(x) = a x - x b``."""
    a = _mat(a)
    b = _mat(b)
    ah, bh = a.conj().T, b.conj().T
    x = rng.standard_normal((a.shape[0], b.shape[0])) \
        + 1j * rng.standard_normal((a.shape[0], b.shape[0]))
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iterations):
        y = a @ x - x @ b
        z = ah @ y - y @ bh
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0
        new = float(np.sqrt(nz))
        x = z / nz
        if abs(new - est) <= rtol * new:
            return new
        est = new
    return est


def inner_derivation_norm(a, b, rng: Optional[np.random.Generator] = None,
                          cap: int = DERIVATION_DIM_CAP) -> float:
    """Exact norm up to ``cap``, randomized power iteration above it."""
    if max(_mat(a).shape[0], _mat(b).shape[0]) <= cap:
        return inner_derivation_norm_exact(a, b, cap)
    return inner_derivation_norm_power(a, b, rng or np.random.default_rng(0))


def _positive_extremes(x, name: str, tol: ToleranceConfig):
    H = hermitian_part(x, tol)
    w = np.linalg.eigvalsh(H)
    if w[0] < -tol.inequality_slack:
        raise PreconditionError(f"{name} is not positive: psd margin {w[0]:.3e}")
    return max(float(w[0]), 0.0), max(float(w[-1]), 0.0)


def stampfli_bound(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``max{||a|| - ||b^-1||^-1, ||b|| - ||a^-1||^-1}`` for positive ``a``, ``b``.

    ``||x^-1||^-1`` is the smallest eigenvalue, which is zero for singular
    ``x``, matching the convention for non-invertible inputs.
    """
    amin, amax = _positive_extremes(a, "a", tol)
    bmin, bmax = _positive_extremes(b, "b", tol)
    return max(amax - bmin, bmax - amin, 0.0)


# -- fractional powers -------------------------------------------------------

def _positive_definite(A, name: str) -> HermitianOperator:
    A = _herm(A)
    w = A.eig().values
    if w[0] <= 0.0:
        raise PreconditionError(
            f"{name} must be positive invertible, smallest eigenvalue {w[0]:.3e}")
    return A


def interpolation_check(A, B, T, alpha: float,
                        tol: ToleranceConfig = DEFAULT_TOL) -> InequalityReport:
    """``||A^a T B^-a|| <= ||A T B^-1||^a ||T||^(1-a)`` for positive invertible ``A``, ``B``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    A = _positive_definite(A, "A")
    B = _positive_definite(B, "B")
    T = _mat(T)
    Binv = B.func(lambda x: 1.0 / x)
    full = operator_norm(A.matrix @ T @ Binv)
    if alpha == 1.0:
        lhs = full
        rhs = full
    else:
        lhs = operator_norm(A.func(lambda x: x ** alpha) @ T
                            @ B.func(lambda x: x ** -alpha))
        rhs = full ** alpha * operator_norm(T) ** (1.0 - alpha)
    return _compare(lhs, rhs, tol.inequality_slack)


def mu_fractional_bounds_check(D, mu: ConformalFactor, alpha: float,
                               tol: ToleranceConfig = DEFAULT_TOL):
    """Both fractional-power bounds relating ``<D>`` and ``mu <D> mu*``.

    Returns a pair of :class:`InequalityReport` for

    ``||<D>^a mu* (mu <D> mu*)^-a|| <= ||mu^-1||^a ||mu||^(1-a)`` and
    ``||(mu <D> mu*)^a mu^-1* <D>^-a|| <= ||mu||^a ||mu^-1||^(1-a)``.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    D = _herm(D)
    m, minv = mu.mu, mu.mu_inv
    W = HermitianOperator(m @ D.bracket(1.0) @ m.conj().T, D.tol)
    lhs1 = operator_norm(D.bracket(alpha) @ m.conj().T @ W.func(lambda x: x ** -alpha))
    lhs2 = operator_norm(W.func(lambda x: x ** alpha) @ minv.conj().T @ D.bracket(-alpha))
    rhs1 = mu.inv_norm ** alpha * mu.norm ** (1.0 - alpha)
    rhs2 = mu.norm ** alpha * mu.inv_norm ** (1.0 - alpha)
    return (_compare(lhs1, rhs1, tol.inequality_slack),
            _compare(lhs2, rhs2, tol.inequality_slack))


@dataclass(frozen=True)
class SandwichReport:
    margin_lower: float
    margin_upper: float
    C: float

    def holds(self, slack: float) -> bool:
        return self.margin_lower >= -slack and self.margin_upper >= -slack


def _inverse_one_plus_square(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    R = np.linalg.inv(np.eye(n) + M @ M)
    return 0.5 * (R + R.conj().T)


def sandwich_check(D, mu: ConformalFactor,
                   tol: ToleranceConfig = DEFAULT_TOL) -> SandwichReport:
    """Margins of ``C^-1 mu^-1* R mu^-1 <= (1 + (mu D mu*)^2)^-1 <= C mu^-1* R mu^-1``.

    Here ``R = (1 + D^2)^-1`` and ``C = max{||mu||^2, ||mu^-1||^2}``.
    """
    D = _herm(D)
    M = D.matrix
    minv = mu.mu_inv
    middle = _inverse_one_plus_square(mu.mu @ M @ mu.mu.conj().T)
    base = minv.conj().T @ _inverse_one_plus_square(M) @ minv
    base = 0.5 * (base + base.conj().T)
    C = max(mu.norm ** 2, mu.inv_norm ** 2)
    return SandwichReport(psd_margin(middle - base / C, tol),
                          psd_margin(C * base - middle, tol), C)


def conformal_difference_norm(D, mu: ConformalFactor, a, beta: float) -> float:
    """``||(F_{mu D mu*} - F_D) a mu <D>^beta||``."""
    D = _herm(D)
    a = _mat(a)
    diff = bounded_transform(mu.conjugate(D)).matrix - bounded_transform(D).matrix
    X = diff @ a @ mu.mu
    if beta != 0.0:
        X = X @ D.bracket(beta)
    return operator_norm(X)


def additive_difference_norm(D0, V, beta: float) -> float:
    """``||(F_{D0 + V} - F_{D0}) <D0>^beta||`` for a bounded Hermitian ``V``."""
    D0 = _herm(D0)
    D1 = HermitianOperator(D0.matrix + _mat(V), D0.tol)
    diff = bounded_transform(D1).matrix - bounded_transform(D0).matrix
    if beta != 0.0:
        diff = diff @ D0.bracket(beta)
    return operator_norm(diff)


# -- converse ---------------------------------------------------------------

@dataclass(frozen=True)
class ConverseParts:
    """``D2 = mu D1 mu* + T`` with ``mu = <D2>^1/2 <D1>^-1/2``."""

    mu: ConformalFactor
    T: HermitianOperator
    D1: HermitianOperator = field(repr=False)
    D2: HermitianOperator = field(repr=False)
    residual: float = 0.0

    def diagnostics(self, alpha: float) -> dict:
        """Norms attached to the one-sided estimates at order ``alpha``.

        ``commutator``: ``||([F_D1, mu] - T <D2>^-1) <D1>^alpha||``;
        ``additive``: ``||<D1>^-1/2 T <D1>^(alpha - 1/2)||``.
        These are reported only; no constants are asserted.
        """
        F1 = bounded_transform(self.D1).matrix
        m = self.mu.mu
        W = self.D1.bracket(alpha)
        C = (F1 @ m - m @ F1) - self.T.matrix @ self.D2.bracket(-1.0)
        h = self.D1.bracket(-0.5)
        return {
            "alpha": float(alpha),
            "commutator": operator_norm(C @ W),
            "additive": operator_norm(h @ self.T.matrix @ self.D1.bracket(alpha - 0.5)),
        }


def converse_decompose(D1, D2, tol: ToleranceConfig = DEFAULT_TOL) -> ConverseParts:
    """Split ``D2`` as ``mu D1 mu* + T``.

    ``mu = <D2>^1/2 <D1>^-1/2`` and ``T = <D2>^1/2 (F_D2 - F_D1) <D2>^1/2``.
    When ``D2`` equals ``D1`` entrywise the result is ``mu = I``, ``T = 0``.

    Raises
    ------
    ConsistencyError
        If the parts fail to reconstruct ``D2`` within ``reconstruction_tol``
        relative to ``1 + ||D2||``.
    """
    D1 = _herm(D1)
    D2 = _herm(D2)
    if D1.dim != D2.dim:
        raise ValueError("D1 and D2 must have the same dimension")
    n = D1.dim
    if np.array_equal(D1.matrix, D2.matrix):
        mu = ConformalFactor.identity(n)
        return ConverseParts(mu, HermitianOperator(np.zeros((n, n)), tol), D1, D2, 0.0)
    h2 = D2.bracket(0.5)
    mu = ConformalFactor(h2 @ D1.bracket(-0.5), D1.bracket(0.5) @ D2.bracket(-0.5))
    F1 = bounded_transform(D1).matrix
    F2 = bounded_transform(D2).matrix
    T = HermitianOperator(hermitian_part(h2 @ (F2 - F1) @ h2, tol), tol)
    recon = mu.mu @ D1.matrix @ mu.mu.conj().T + T.matrix
    residual = operator_norm(D2.matrix - recon)
    scale = 1.0 + operator_norm(D2.matrix)
    if residual > max(tol.reconstruction_tol, 1e-12 * D2.dim) * scale:
        raise ConsistencyError(f"converse reconstruction residual {residual:.3e}")
    return ConverseParts(mu, T, D1, D2, residual)


# -- trend classification ------------------------------------------------------

BOUNDED = "bounded-plateau"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"


def top_half_slope(params: Sequence[float], values: Sequence[float]) -> float:
    """Log-log slope over the upper half (at least two points) of a sweep.

    All-zero tails have slope 0; otherwise values are floored at a tiny
    fraction of their maximum before taking logs.
    """
    p = np.asarray(params, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if p.size < 2:
        raise ValueError("need at least two sweep points")
    k = max(2, int(np.ceil(p.size / 2)))
    p, v = p[-k:], v[-k:]
    top = float(np.max(v))
    if top == 0.0:
        return 0.0
    v = np.maximum(v, top * 1e-300)
    return loglog_slope(p, v)


def classify_slope(slope: float) -> str:
    if slope <= PLATEAU_SLOPE:
        return BOUNDED
    if slope >= DIVERGENT_SLOPE:
        return DIVERGENT
    return INCONCLUSIVE
