"""A minimal differential algebra of rational expressions in jet symbols.

Symbols are multi-indices ``alpha`` standing for the derivative ``F_alpha``.
Elements are ``num / F_den**m`` with ``num`` a polynomial with rational
coefficients; the only denominators ever needed here are powers of ``F_xx``.
Total derivatives shift symbol indices, optionally followed by a reduction
rule that rewrites some symbols (e.g. ``F_yy -> F_xy**2 / F_xx``).

This is used once, at first use, to derive explicit polynomials which are then
evaluated on jets.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping

Monomial = tuple  # sorted tuple of (symbol, exponent)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for s, e in b:
        d[s] = d.get(s, 0) + e
    return tuple(sorted(d.items()))


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c}

    @classmethod
    def symbol(cls, s) -> Poly:
        return cls({((s, 1),): 1})

    @classmethod
    def const(cls, c) -> Poly:
        return cls({(): c})

    def __add__(self, other: Poly) -> Poly:
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Poly(t)

    def __neg__(self) -> Poly:
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return Poly({m: c * other for m, c in self.terms.items()})
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return Poly(t)

    def __pow__(self, n: int) -> Poly:
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def partial(self, s) -> Poly:
        t: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(s, 0)
            if e:
                if e == 1:
                    del d[s]
                else:
                    d[s] = e - 1
                key = tuple(sorted(d.items()))
                t[key] = t.get(key, 0) + c * e
        return Poly(t)

    def divide_symbol(self, s) -> Poly:
        """Divide by ``s``; every monomial must contain it."""
        t = {}
        for m, c in self.terms.items():
            d = dict(m)
            d[s] -= 1
            if not d[s]:
                del d[s]
            t[tuple(sorted(d.items()))] = c
        return Poly(t)

    def symbols(self) -> set:
        return {s for m in self.terms for s, _ in m}

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def evaluate(self, values: Mapping, one):
        """Evaluate with ``values[symbol]`` (jets or numbers); ``one`` is the unit."""
        powers: dict = {}

        def power(s, e):
            key = (s, e)
            if key not in powers:
                powers[key] = values[s] if e == 1 else power(s, e - 1) * values[s]
            return powers[key]

        total = None
        for m, c in sorted(self.terms.items()):
            term = one * c
            for s, e in m:
                term = term * power(s, e)
            total = term if total is None else total + term
        return one * 0 if total is None else total


class DiffRational:
    """``num / F_den**m`` in a differential algebra (see :class:`DiffAlgebra`)."""

    __slots__ = ("alg", "num", "m")

    def __init__(self, alg: DiffAlgebra, num: Poly, m: int = 0):
        self.alg = alg
        self.num = num
        self.m = m
        self._normalize()

    def _normalize(self):
        # cancel common factors of F_den
        den = self.alg.den
        while self.m > 0 and self.num.terms and all(dict(mono).get(den, 0) for mono in self.num.terms):
            self.num = self.num.divide_symbol(den)
            self.m -= 1
        if not self.num.terms:
            self.m = 0

    def _lift(self, other) -> DiffRational:
        if isinstance(other, DiffRational):
            return other
        return DiffRational(self.alg, Poly.const(other))

    def _aligned(self, other: DiffRational):
        m = max(self.m, other.m)
        d = Poly.symbol(self.alg.den)
        return self.num * d ** (m - self.m), other.num * d ** (m - other.m), m

    def __add__(self, other):
        o = self._lift(other)
        a, b, m = self._aligned(o)
        return DiffRational(self.alg, a + b, m)

    __radd__ = __add__

    def __neg__(self):
        return DiffRational(self.alg, -self.num, self.m)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, DiffRational):
            return DiffRational(self.alg, self.num * other.num, self.m + other.m)
        return DiffRational(self.alg, self.num * Fraction(other), self.m)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DiffRational):
            # only monomials c * F_den**e are invertible here
            if len(other.num.terms) != 1:
                raise ValueError("can only divide by a monomial in the denominator symbol")
            (mono, c), = other.num.terms.items()
            if any(s != self.alg.den for s, _ in mono):
                raise ValueError("can only divide by a monomial in the denominator symbol")
            e = dict(mono).get(self.alg.den, 0)
            d = Poly.symbol(self.alg.den)
            return DiffRational(self.alg, self.num * d ** other.m * (1 / c), self.m + e)
        return DiffRational(self.alg, self.num * (1 / Fraction(other)), self.m)

    def __pow__(self, n: int):
        out = DiffRational(self.alg, Poly.const(1))
        for _ in range(n):
            out = out * self
        return out

    def derive(self, i: int) -> DiffRational:
        return self.alg.derive(self, i)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if not isinstance(other, DiffRational):
            other = self._lift(other)
        a, b, _ = self._aligned(other)
        return a == b

    __hash__ = None

    def evaluate(self, values: Mapping, one):
        return self.num.evaluate(values, one) / values[self.alg.den] ** self.m if self.m else self.num.evaluate(values, one)


class DiffAlgebra:
    """Symbols ``F_alpha`` with total derivatives ``D_i`` and reduction rules.

    ``rules`` maps a symbol to a :class:`DiffRational` replacing it; it is
    filled lazily by ``rule_factory(symbol)`` which may return None for free
    symbols.
    """

    def __init__(self, nvars: int, den, rule_factory: Callable | None = None):
        self.nvars = nvars
        self.den = tuple(den)
        self.rule_factory = rule_factory
        self._rules: dict = {}

    def sym(self, alpha) -> DiffRational:
        alpha = tuple(alpha)
        rule = self.rule(alpha)
        if rule is not None:
            return rule
        return DiffRational(self, Poly.symbol(alpha))

    def const(self, c) -> DiffRational:
        return DiffRational(self, Poly.const(c))

    def rule(self, alpha):
        if self.rule_factory is None:
            return None
        if alpha not in self._rules:
            self._rules[alpha] = self.rule_factory(self, alpha)
        return self._rules[alpha]

    def _shift(self, alpha, i):
        return alpha[:i] + (alpha[i] + 1,) + alpha[i + 1 :]

    def derive(self, f: DiffRational, i: int) -> DiffRational:
        """Total derivative ``D_i`` followed by reduction."""
        out = DiffRational(self, Poly(), 0)
        for s in f.num.symbols():
            out = out + DiffRational(self, f.num.partial(s), f.m) * self.sym(self._shift(s, i))
        if f.m:
            dden = self.sym(self._shift(self.den, i))
            out = out - DiffRational(self, f.num * f.m, f.m + 1) * dden
        return out
