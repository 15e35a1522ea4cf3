"""Transforms of a self-adjoint matrix.

Bounded transform ``F_D = D (1 + D^2)^{-1/2}``, logarithmic transform
``L_D = F_D log<D>``, the integral representation of fractional resolvent
powers and weighted commutator norms.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .opcore import (DEFAULT_TOL, HermitianOperator, ToleranceConfig,
                     apply_function, operator_norm)


class QuadratureError(RuntimeError):
    """The quadrature did not reach the requested relative tolerance."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class ExponentParams:
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")

    @property
    def beta_admissible(self) -> bool:
        return self.beta < 1.0 - self.alpha


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretisation of the resolvent integral.

    ``nodes`` is the number of trapezoid nodes on ``t in [-T, T]`` with
    ``T = log(lambda_cap)``; the adaptive rule treats it as a starting value.
    """

    rule: str = "adaptive"
    nodes: int = 64
    lambda_cap: float = 1e12
    max_refinements: int = 8

    def __post_init__(self):
        if self.rule not in ("adaptive", "fixed-log-grid"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.nodes < 8:
            raise ValueError("nodes must be at least 8")
        if not self.lambda_cap > 1.0:
            raise ValueError("lambda_cap must exceed 1")


def _herm(D) -> HermitianOperator:
    return D if isinstance(D, HermitianOperator) else HermitianOperator(D)


def bounded_transform(D) -> HermitianOperator:
    D = _herm(D)
    return apply_function(D, lambda x: x / np.sqrt(1.0 + x * x))


def log_transform(D) -> HermitianOperator:
    D = _herm(D)

    def f(x):
        r = np.sqrt(1.0 + x * x)
        return x * np.log(r) / r

    return apply_function(D, f)


def bracket(D, power: float = 1.0) -> np.ndarray:
    """``<D>^power`` as an ndarray."""
    return _herm(D).bracket(power)


def _trapezoid(X: np.ndarray, alpha: float, T: float, m: int) -> np.ndarray:
    """Trapezoid sum of ``e^{(1-alpha)t} (e^t + X)^{-1}`` over ``m+1`` nodes."""
    n = X.shape[0]
    t = np.linspace(-T, T, m + 1)
    h = 2.0 * T / m
    w = np.full(m + 1, h)
    w[0] = w[-1] = 0.5 * h
    w = w * np.exp((1.0 - alpha) * t)
    eye = np.eye(n)
    stack = X[None, :, :] + np.exp(t)[:, None, None] * eye[None, :, :]
    inv = np.linalg.solve(stack, np.broadcast_to(eye, stack.shape))
    return np.tensordot(w, inv, axes=1)


def _resolvent_integral(X: np.ndarray, alpha: float, T: float, m: int):
    """Integral over ``lambda in (0, inf)`` with both tails added analytically.

    Returns the approximation and a bound on what the tail terms omit.
    """
    n = X.shape[0]
    body = _trapezoid(X, alpha, T, m)
    upper = np.exp(-alpha * T) / alpha * np.eye(n)
    Xinv = np.linalg.solve(X, np.eye(n))
    lower = np.exp(-(1.0 - alpha) * T) / (1.0 - alpha) * Xinv
    normX = operator_norm(X)
    normXinv = operator_norm(Xinv)
    tail_bound = (normX * np.exp(-(1.0 + alpha) * T) / (1.0 + alpha)
                  + normXinv ** 2 * np.exp(-(2.0 - alpha) * T) / (2.0 - alpha))
    return body + upper + lower, tail_bound


def resolvent_power_quadrature(D, alpha: float, spec: QuadratureSpec = QuadratureSpec(),
                               tol: ToleranceConfig = DEFAULT_TOL) -> HermitianOperator:
    """``(1 + D^2)^{-alpha}`` from its resolvent integral.

    The integral ``(sin(alpha pi)/pi) int_0^inf lambda^{-alpha} (lambda + 1 + D^2)^{-1}
    dlambda`` is evaluated with ``lambda = e^t`` and the trapezoid rule, which
    converges geometrically because the integrand is analytic in a strip of
    half-width pi. Resolvents are obtained by linear solves, so the result does
    not depend on an eigendecomposition of ``D``.

    Raises
    ------
    QuadratureError
        If the estimated relative error stays above ``quadrature_rel_tol``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    D = _herm(D)
    M = D.matrix
    X = np.eye(D.dim) + M @ M
    X = 0.5 * (X + X.conj().T)
    scale = np.sin(alpha * np.pi) / np.pi
    rtol = tol.quadrature_rel_tol
    T = float(np.log(spec.lambda_cap))
    m = spec.nodes

    approx, tail = _resolvent_integral(X, alpha, T, m)
    if spec.rule == "fixed-log-grid":
        ref = operator_norm(approx)
        estimate = tail / ref
        if estimate > rtol:
            raise QuadratureError(
                f"tail estimate {estimate:.2e} exceeds {rtol:.1e}; raise lambda_cap",
                estimate)
        return HermitianOperator(scale * approx, tol)

    estimate = np.inf
    for _ in range(spec.max_refinements):
        ref = operator_norm(approx)
        if tail > 0.01 * rtol * ref:
            T *= 1.5
            m = int(np.ceil(m * 1.5))
        else:
            m *= 2
        finer, tail = _resolvent_integral(X, alpha, T, m)
        estimate = (operator_norm(finer - approx) + tail) / operator_norm(finer)
        approx = finer
        if estimate < 0.1 * rtol:
            return HermitianOperator(scale * approx, tol)
    if estimate < rtol:
        return HermitianOperator(scale * approx, tol)
    raise QuadratureError(
        f"quadrature stalled at relative error estimate {estimate:.2e}", estimate)


def weighted_commutator_norm(F, a, D, beta: float) -> float:
    """``||(F a - a F) <D>^beta||``."""
    F = np.asarray(getattr(F, "matrix", F), dtype=complex)
    a = np.asarray(a, dtype=complex)
    D = _herm(D)
    if not (F.shape == a.shape == (D.dim, D.dim)):
        raise ValueError("dimension mismatch")
    C = F @ a - a @ F
    if beta == 0.0:
        return operator_norm(C)
    return operator_norm(C @ D.bracket(beta))


def lipschitz_alpha_norm(D, a, alpha: float) -> Tuple[float, float]:
    """``(||[D,a] <D>^{-alpha}||, ||<D>^{-alpha} [D,a]||)``."""
    D = _herm(D)
    a = np.asarray(a, dtype=complex)
    if a.shape != (D.dim, D.dim):
        raise ValueError("dimension mismatch")
    C = D.matrix @ a - a @ D.matrix
    if alpha == 0.0:
        n = operator_norm(C)
        return n, n
    W = D.bracket(-alpha)
    return operator_norm(C @ W), operator_norm(W @ C)
