"""The integer Heisenberg lattice and its Clifford-valued order-2 symbol.

Points ``(a, b, c)`` multiply as ``(a, b, c)(a', b', c') = (a+a', b+b', c+c'+ab')``.
The symbol is ``l(a, b, c) = (a g1 + b g2) sqrt(a^2 + b^2) + c g3`` with the
Pauli matrices as ``g1, g2, g3``. Coefficients are kept exactly as signed
square roots of integers, so dilation homogeneity is an integer identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .lab.sweep import SweepReport, run_sweep
from .opcore import HermitianOperator
from .transforms import lipschitz_alpha_norm

GAMMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
INT64_MAX = 2 ** 63 - 1

GENERATORS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


@dataclass(frozen=True)
class HeisPoint:
    a: int
    b: int
    c: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c):
            if int(v) != v:
                raise TypeError("Heisenberg coordinates must be integers")
            if abs(int(v)) > INT64_MAX:
                raise OverflowError("coordinate outside the 64-bit range")

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def __mul__(self, other: "HeisPoint") -> "HeisPoint":
        return heis_mul(self, other)

    def inverse(self) -> "HeisPoint":
        return HeisPoint(-self.a, -self.b, -self.c + self.a * self.b)


IDENTITY = HeisPoint(0, 0, 0)


def heis_mul(g: HeisPoint, h: HeisPoint) -> HeisPoint:
    """``(a+a', b+b', c+c'+ab')``; raises ``OverflowError`` beyond 64 bits."""
    return HeisPoint(g.a + h.a, g.b + h.b, g.c + h.c + g.a * h.b)


def dilate(g: HeisPoint, t: int) -> HeisPoint:
    return HeisPoint(t * g.a, t * g.b, t * t * g.c)


@dataclass(frozen=True)
class CliffordValue:
    """``x1 g1 + x2 g2 + x3 g3`` with ``x_k = sign_k sqrt(rad_k)`` exactly."""

    sign: Tuple[int, int, int]
    rad: Tuple[int, int, int]

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([s * np.sqrt(float(r)) for s, r in zip(self.sign, self.rad)])

    @property
    def matrix(self) -> np.ndarray:
        x = self.coeffs
        return x[0] * GAMMA[0] + x[1] * GAMMA[1] + x[2] * GAMMA[2]

    @property
    def square_scalar(self) -> int:
        """``l^2`` is this integer times the identity."""
        return sum(self.rad)

    def norm(self) -> float:
        return float(np.sqrt(float(self.square_scalar)))

    def scaled_equals(self, other: "CliffordValue", s: int) -> bool:
        """Exact test of ``self == s * other`` for a positive integer ``s``."""
        return all(
            (r == 0 and ro == 0) or (sg == so and r == s * s * ro)
            for sg, r, so, ro in zip(self.sign, self.rad, other.sign, other.rad))


def _signed(x: int, rad: int) -> Tuple[int, int]:
    """``x sqrt(rad)`` as a signed radicand pair."""
    if x == 0 or rad == 0:
        return 0, 0
    return (1 if x > 0 else -1), x * x * rad


def ell(g: HeisPoint) -> CliffordValue:
    a, b, c = g
    rho = a * a + b * b
    s1, r1 = _signed(a, rho)
    s2, r2 = _signed(b, rho)
    s3, r3 = _signed(c, 1)
    return CliffordValue((s1, s2, s3), (r1, r2, r3))


def bracket_square(g: HeisPoint) -> int:
    """``1 + (a^2 + b^2)^2 + c^2``, the scalar value of ``1 + l(g)^2``."""
    a, b, c = g
    return 1 + (a * a + b * b) ** 2 + c * c


# -- dilations ------------------------------------------------------------------

@dataclass(frozen=True)
class DilationReport:
    t: int
    R: int
    max_residual: float
    exact: bool
    coverage: float
    index: int
    normalisation: float


def dilation_check(t: int, R: int) -> DilationReport:
    """Homogeneity ``l(delta_t h) = t^2 l(h)`` on the window ``max |coord| <= R``.

    Pulling back along ``delta_t`` therefore conjugates ``M_l`` to
    ``t^2 M_l`` on points whose dilate stays in the window (the coverage).
    The lattice index of ``delta_t Z^3`` is counted on an aligned box and
    gives the normalisation ``t^-2`` of the unitary dilation.
    """
    if int(t) != t or t < 1:
        raise ValueError("t must be a positive integer")
    exact = True
    worst = 0.0
    covered = 0
    total = 0
    for a in range(-R, R + 1):
        for b in range(-R, R + 1):
            for c in range(-R, R + 1):
                total += 1
                h = HeisPoint(a, b, c)
                th = dilate(h, t)
                if max(abs(th.a), abs(th.b), abs(th.c)) > R:
                    continue
                covered += 1
                lhs, rhs = ell(th), ell(h)
                ok = lhs.scaled_equals(rhs, t * t)
                exact &= ok
                if not ok:
                    worst = max(worst, float(np.abs(lhs.coeffs - t * t * rhs.coeffs).max()))
    index = lattice_index(t)
    return DilationReport(t, R, worst, exact, covered / total, index, index ** -0.5)


def lattice_index(t: int, M: int = 2) -> int:
    """``[Z^3 : delta_t Z^3]`` by counting on the box ``[0, tM)^2 x [0, t^2 M)``."""
    a = np.arange(t * M)
    c = np.arange(t * t * M)
    A, B, C = np.meshgrid(a, a, c, indexing="ij")
    image = (A % t == 0) & (B % t == 0) & (C % (t * t) == 0)
    total = A.size
    n_image = int(np.count_nonzero(image))
    if total % n_image:
        raise ArithmeticError("index count is not an integer")
    return total // n_image


# -- commutator bounds ------------------------------------------------------------

def _coeffs(a, b, c):
    rho = np.sqrt(a * a + b * b)
    return a * rho, b * rho, c


def symbol_sup(g: HeisPoint, R: int, exponent: float = -0.25) -> float:
    """``sup ||(l(gh) - l(h)) (1 + l(h)^2)^exponent||`` over ``max |coord| <= R``."""
    ga, gb, gc = (float(v) for v in g)
    r = np.arange(-R, R + 1, dtype=float)
    A, B = np.meshgrid(r, r, indexing="ij")
    x1, x2, _ = _coeffs(A, B, 0.0)
    y1, y2, _ = _coeffs(A + ga, B + gb, 0.0)
    d12 = (y1 - x1) ** 2 + (y2 - x2) ** 2
    rho4 = (A * A + B * B) ** 2
    best = 0.0
    # the c-shift of gh is gc + ga * b, independent of c
    d3 = (gc + ga * B) ** 2
    base = np.sqrt(d12 + d3)
    for c in r:
        w = (1.0 + rho4 + c * c) ** exponent
        best = max(best, float(np.max(base * w)))
    return best


def commutator_bound_sweep(g: HeisPoint, radii: Sequence[int], exponent: float = -0.25,
                           seed: int = 0, config_hash: str = "") -> SweepReport:
    name = f"heisenberg:g=({g.a},{g.b},{g.c}):exp={exponent:g}"
    return run_sweep(lambda R: symbol_sup(g, int(R), exponent), radii, name=name,
                     parameter_name="R", seed=seed, config_hash=config_hash)


# -- explicit lattice operators on a small window -----------------------------------

def window_points(R: int) -> List[HeisPoint]:
    r = range(-R, R + 1)
    return [HeisPoint(a, b, c) for a in r for b in r for c in r]


def window_operators(g: HeisPoint, R: int):
    """``M_l`` and the truncated left translation by ``g`` on ``l^2(window) (x) C^2``."""
    pts = window_points(R)
    pos = {tuple(p): k for k, p in enumerate(pts)}
    n = len(pts)
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    lam = np.zeros((2 * n, 2 * n), dtype=complex)
    for k, p in enumerate(pts):
        M[2 * k:2 * k + 2, 2 * k:2 * k + 2] = ell(p).matrix
        target = pos.get(tuple(heis_mul(g, p)))
        if target is not None:
            lam[2 * target:2 * target + 2, 2 * k:2 * k + 2] = np.eye(2)
    return HermitianOperator(M), lam


def windowed_symbol_sup(g: HeisPoint, R: int, exponent: float = -0.25) -> float:
    """Symbol sup restricted to ``h`` with ``gh`` also in the window."""
    best = 0.0
    for h in window_points(R):
        gh = heis_mul(g, h)
        if max(abs(gh.a), abs(gh.b), abs(gh.c)) > R:
            continue
        diff = ell(gh).coeffs - ell(h).coeffs
        best = max(best, float(np.linalg.norm(diff)) * bracket_square(h) ** exponent)
    return best


def lattice_lipschitz(g: HeisPoint, R: int, alpha: float = 0.5) -> Tuple[float, float]:
    """``lipschitz_alpha_norm`` of ``M_l`` against the truncated translation."""
    D, lam = window_operators(g, R)
    return lipschitz_alpha_norm(D, lam, alpha)
