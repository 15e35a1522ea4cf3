"""Exact arithmetic in the polynomial algebra of SU_q(2).

Elements are dictionaries ``{(r, m, n): Fraction}`` over the normal-ordered
monomials ``a^r b^m c^n`` (``r >= 0``) and ``d^{-r} b^m c^n`` (``r < 0``), which
form a linear basis. Products are normal ordered with the defining relations

    ab = q ba, ac = q ca, bd = q db, cd = q dc, bc = cb,
    ad = 1 + q bc, da = 1 + q^-1 bc,

using ``z = bc`` and the closed forms ``a^y d^y = prod_{k=1..y} (1 + q^{2k-1} z)``,
``d^y a^y = prod_{k=1..y} (1 + q^{1-2k} z)``.

The Peter-Weyl elements are generated from ``a^{2l}`` by two twisted
derivations with rational structure constants:

* ``e(x) = q^{1/2} (EK) -> x``, with ``a -> b``, ``c -> d`` and
  ``e(xy) = e(x) (K^2 -> y) + x e(y)``;
* ``f(x) = q^{-1/2} x <- (K^-1 F)``, with ``a -> c``, ``b -> d`` and
  ``f(xy) = f(x) y + (x <- K^-2) f(y)``.

All half-integers (spin ``l`` and weights ``i``, ``j``) are stored doubled.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple

Mono = Tuple[int, int, int]
Elem = Dict[Mono, Fraction]

A: Mono = (1, 0, 0)
B: Mono = (0, 1, 0)
C: Mono = (0, 0, 1)
D: Mono = (-1, 0, 0)
ONE: Mono = (0, 0, 0)
GENERATORS = {"a": A, "b": B, "c": C, "d": D}


def as_fraction(q) -> Fraction:
    """Exact rational from a float or string, using its shortest decimal form."""
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    return Fraction(repr(float(q))) if isinstance(q, float) else Fraction(q)


def weights2(mono: Mono) -> Tuple[int, int]:
    """Doubled weights ``(2i, 2j)`` of a monomial."""
    r, m, n = mono
    return -r - m + n, -r + m - n


def degree(mono: Mono) -> int:
    r, m, n = mono
    return abs(r) + m + n


def add_into(acc: Elem, x: Elem, scale: Fraction = Fraction(1)) -> Elem:
    for k, v in x.items():
        w = acc.get(k, 0) + scale * v
        if w:
            acc[k] = w
        else:
            acc.pop(k, None)
    return acc


class SUq2:
    """The algebra ``O(SU_q(2))`` at a fixed rational ``q`` in ``(0, 1)``."""

    def __init__(self, q):
        q = as_fraction(q)
        if not 0 < q < 1:
            raise ValueError(f"q must lie in (0, 1), got {q}")
        self.q = q
        self._fpoly_cache: Dict[int, List[Fraction]] = {0: [Fraction(1)]}
        self._gpoly_cache: Dict[int, List[Fraction]] = {0: [Fraction(1)]}
        self._haar_z: List[Fraction] = [Fraction(1)]

    # -- products -----------------------------------------------------------

    def _qpow(self, k: int) -> Fraction:
        return self.q ** k

    def _zpoly(self, y: int, sign: int, cache) -> List[Fraction]:
        if y not in cache:
            prev = self._zpoly(y - 1, sign, cache)
            t = self._qpow(sign * (2 * y - 1))
            out = prev + [Fraction(0)]
            for p in range(len(prev)):
                out[p + 1] += t * prev[p]
            cache[y] = out
        return cache[y]

    def fpoly(self, y: int) -> List[Fraction]:
        """Coefficients of ``a^y d^y`` in powers of ``z = bc``."""
        return self._zpoly(y, 1, self._fpoly_cache)

    def gpoly(self, y: int) -> List[Fraction]:
        """Coefficients of ``d^y a^y`` in powers of ``z = bc``."""
        return self._zpoly(y, -1, self._gpoly_cache)

    def _gprod(self, r1: int, r2: int) -> List[Tuple[Fraction, int, int]]:
        """``g^{r1} g^{r2}`` as a list of ``(coef, r, p)`` for ``g^r z^p``."""
        if (r1 >= 0 and r2 >= 0) or (r1 <= 0 and r2 <= 0):
            return [(Fraction(1), r1 + r2, 0)]
        if r1 > 0:
            x, y = r1, -r2
            if x >= y:
                return [(c, x - y, p) for p, c in enumerate(self.fpoly(y)) if c]
            s = y - x
            # z^p d^s = q^{2ps} d^s z^p
            return [(c * self._qpow(2 * p * s), -s, p)
                    for p, c in enumerate(self.fpoly(x)) if c]
        x, y = -r1, r2
        if x >= y:
            return [(c, -(x - y), p) for p, c in enumerate(self.gpoly(y)) if c]
        s = y - x
        # z^p a^s = q^{-2ps} a^s z^p
        return [(c * self._qpow(-2 * p * s), s, p)
                for p, c in enumerate(self.gpoly(x)) if c]

    def mul_mono(self, X: Mono, Y: Mono) -> Elem:
        return dict(self._mul_mono_cached(X, Y))

    @lru_cache(maxsize=None)
    def _mul_mono_cached(self, X: Mono, Y: Mono):
        r1, m1, n1 = X
        r2, m2, n2 = Y
        # b and c pass through a with q^-1 each and through d with q each
        scale = self._qpow(-(m1 + n1) * r2)
        out: Elem = {}
        for c, r, p in self._gprod(r1, r2):
            key = (r, m1 + m2 + p, n1 + n2 + p)
            out[key] = out.get(key, 0) + scale * c
        return tuple((k, v) for k, v in out.items() if v)

    def mul(self, x: Elem, y: Elem) -> Elem:
        out: Elem = {}
        for X, cx in x.items():
            for Y, cy in y.items():
                for k, v in self._mul_mono_cached(X, Y):
                    out[k] = out.get(k, 0) + cx * cy * v
        return {k: v for k, v in out.items() if v}

    def mul_many(self, *xs: Elem) -> Elem:
        out: Elem = {ONE: Fraction(1)}
        for x in xs:
            out = self.mul(out, x)
        return out

    # -- involution ---------------------------------------------------------

    def star_mono(self, X: Mono) -> Elem:
        """``(g^r b^m c^n)* = (-q^-1)^n (-q)^m b^n c^m (g*)^{|r|}``."""
        r, m, n = X
        coef = (-1 / self.q) ** n * (-self.q) ** m
        head: Mono = (0, n, m)
        return {k: coef * v for k, v in self._mul_mono_cached(head, (-r, 0, 0))}

    def star(self, x: Elem) -> Elem:
        """Adjoint; coefficients are real so no conjugation is needed."""
        out: Elem = {}
        for X, c in x.items():
            add_into(out, self.star_mono(X), c)
        return out

    # -- twisted derivations ------------------------------------------------------

    @staticmethod
    def word(X: Mono) -> List[Mono]:
        r, m, n = X
        g = A if r >= 0 else D
        return [g] * abs(r) + [B] * m + [C] * n

    def _leibniz(self, X: Mono, table: Dict[Mono, Mono], prefix_weight, suffix_weight) -> Elem:
        w = self.word(X)
        out: Elem = {}
        for p, g in enumerate(w):
            if g not in table:
                continue
            pre = self._word_mono(w[:p])
            suf = self._word_mono(w[p + 1:])
            scale = prefix_weight(pre) * suffix_weight(suf)
            term = self.mul({pre: Fraction(1)}, self.mul({table[g]: Fraction(1)}, {suf: Fraction(1)}))
            add_into(out, term, scale)
        return out

    @staticmethod
    def _word_mono(w: List[Mono]) -> Mono:
        # prefixes and suffixes of a normal-ordered word are normal ordered
        r = sum(g[0] for g in w)
        return (r, sum(g[1] for g in w), sum(g[2] for g in w))

    def e_mono(self, X: Mono) -> Elem:
        one = lambda _: Fraction(1)
        # K^2 -> y multiplies by q^{2j}
        return self._leibniz(X, {A: B, C: D}, one, lambda y: self._qpow(weights2(y)[1]))

    def f_mono(self, X: Mono) -> Elem:
        one = lambda _: Fraction(1)
        # x <- K^-2 multiplies by q^{-2i}
        return self._leibniz(X, {A: C, B: D}, lambda x: self._qpow(-weights2(x)[0]), one)

    def e(self, x: Elem) -> Elem:
        out: Elem = {}
        for X, c in x.items():
            add_into(out, self.e_mono(X), c)
        return out

    def f(self, x: Elem) -> Elem:
        out: Elem = {}
        for X, c in x.items():
            add_into(out, self.f_mono(X), c)
        return out

    # -- Haar state ---------------------------------------------------------------

    def haar_z(self, p: int) -> Fraction:
        """``h(z^p)`` for ``z = bc`` from invariance ``h(f(a b z^{p-1})) = 0``."""
        while len(self._haar_z) <= p:
            k = len(self._haar_z)
            y = self.f_mono((1, k, k - 1))
            total = Fraction(0)
            lead = Fraction(0)
            for (r, m, n), v in y.items():
                if r != 0 or m != n:
                    raise ArithmeticError("unexpected weight in invariance relation")
                if m == k:
                    lead = v
                else:
                    total += v * self._haar_z[m]
            if lead == 0:
                raise ArithmeticError(f"degenerate invariance relation at p = {k}")
            self._haar_z.append(-total / lead)
        return self._haar_z[p]

    def haar(self, x: Elem) -> Fraction:
        out = Fraction(0)
        for (r, m, n), v in x.items():
            if r == 0 and m == n:
                out += v * self.haar_z(m)
        return out

    def inner(self, x: Elem, y: Elem) -> Fraction:
        """``<x|y> = h(x* y)``."""
        return self.haar(self.mul(self.star(x), y))


PWKey = Tuple[int, int, int]  # (2l, 2i, 2j)


class PeterWeyl:
    """Unnormalised Peter-Weyl elements ``s^l_{ij}`` up to a maximal doubled spin.

    ``s^l_{-l,-l} = a^{2l}``; rows are generated by ``f`` and columns by ``e``.
    The true matrix elements are ``t^l_{ij} = c^l_{ij} s^l_{ij}`` with the
    constants computed in the floating-point layer.
    """

    def __init__(self, alg: SUq2, l2_max: int):
        self.alg = alg
        self.l2_max = l2_max
        self.s: Dict[PWKey, Elem] = {}
        for l2 in range(l2_max + 1):
            self._build_spin(l2)
        self._lead: Dict[PWKey, Fraction] = {}
        for key, x in self.s.items():
            self._lead[key] = x.get(self.top_monomial(key), Fraction(0))
            if self._lead[key] == 0:
                raise ArithmeticError(f"vanishing leading coefficient for {key}")
        self._norm2: Dict[PWKey, Fraction] = {}

    @staticmethod
    def top_monomial(key: PWKey) -> Mono:
        """The unique monomial of degree ``2l`` with weights ``(i, j)``."""
        l2, i2, j2 = key
        r = -(i2 + j2) // 2
        diff = (j2 - i2) // 2  # m - n
        tot = l2 - abs(r)      # m + n
        return (r, (tot + diff) // 2, (tot - diff) // 2)

    def _build_spin(self, l2: int):
        alg = self.alg
        col0 = {(l2, -l2, -l2): {(l2, 0, 0): Fraction(1)}}
        for i2 in range(-l2, l2, 2):
            col0[(l2, i2 + 2, -l2)] = alg.f(col0[(l2, i2, -l2)])
        for i2 in range(-l2, l2 + 1, 2):
            x = col0[(l2, i2, -l2)]
            self.s[(l2, i2, -l2)] = x
            for j2 in range(-l2, l2, 2):
                x = alg.e(x)
                self.s[(l2, i2, j2 + 2)] = x

    def keys(self) -> Iterable[PWKey]:
        return self.s.keys()

    def expand(self, x: Elem) -> Dict[PWKey, Fraction]:
        """Coefficients of ``x`` in the ``s`` basis (triangular in degree)."""
        rem = dict(x)
        out: Dict[PWKey, Fraction] = {}
        while rem:
            mono = max(rem, key=lambda k: (degree(k), k))
            i2, j2 = weights2(mono)
            key = (degree(mono), i2, j2)
            if key not in self.s:
                raise KeyError(f"element has degree above the built range: {key}")
            coef = rem[mono] / self._lead[key]
            out[key] = out.get(key, 0) + coef
            add_into(rem, self.s[key], -coef)
            if rem.get(mono):
                raise ArithmeticError("expansion failed to eliminate leading monomial")
        return out

    def norm2(self, key: PWKey) -> Fraction:
        """``h(s* s)``."""
        if key not in self._norm2:
            self._norm2[key] = self.alg.inner(self.s[key], self.s[key])
        return self._norm2[key]
