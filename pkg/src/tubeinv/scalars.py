"""Scalar backends.

Two fields are supported:

* :data:`EXACT` -- rationals (``gmpy2.mpq``); arithmetic never rounds, and
  elementary functions only accept arguments where their value is rational
  (``exp(0)``, ``log(1)``, ``sqrt`` of a rational square, ...).
* :class:`FloatBackend` -- ``mpmath`` binary floats at a fixed precision
  (at least 128 bits), each precision owning a private ``MPContext`` so no
  global state is touched.

Complex values are not a separate backend: complexified jets are pairs of
real jets (see :mod:`tubeinv.cjet`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any

import gmpy2
import mpmath
from gmpy2 import mpq

from .errors import DomainError, NeedsFloatBackend

Scalar = Any

_RATIONAL_TYPES = (int, Fraction, type(mpq(0)), type(gmpy2.mpz(0)))


class ExactBackend:
    """Exact rational arithmetic over ``gmpy2.mpq``."""

    name = "exact"
    exact = True
    precision = None
    tolerance = 0

    def __init__(self):
        self.zero = mpq(0)
        self.one = mpq(1)

    def __repr__(self):
        return "ExactBackend()"

    def __eq__(self, other):
        return isinstance(other, ExactBackend)

    def __hash__(self):
        return hash("exact")

    def scalar(self, value) -> Scalar:
        if isinstance(value, str):
            return parse_rational(value)
        if isinstance(value, _RATIONAL_TYPES):
            return mpq(value)
        if isinstance(value, float):
            # binary floats are exact rationals; accept them verbatim
            return mpq(Fraction(value))
        raise TypeError(f"cannot convert {value!r} to an exact rational")

    def is_zero(self, x, scale=1) -> bool:
        return x == 0

    def abs(self, x):
        return abs(x)

    def to_str(self, x) -> str:
        return str(mpq(x))

    def to_float(self, x) -> float:
        return float(x)

    # elementary functions: rational results only

    def exp(self, x):
        if x == 0:
            return self.one
        raise NeedsFloatBackend(f"exp({x}) is irrational")

    def log(self, x):
        if x <= 0:
            raise DomainError(f"log of non-positive value {x}")
        if x == 1:
            return self.zero
        raise NeedsFloatBackend(f"log({x}) is irrational")

    def sin(self, x):
        if x == 0:
            return self.zero
        raise NeedsFloatBackend(f"sin({x}) is irrational")

    def cos(self, x):
        if x == 0:
            return self.one
        raise NeedsFloatBackend(f"cos({x}) is irrational")

    def asin(self, x):
        if abs(x) >= 1:
            raise DomainError(f"arcsin is not analytic at {x}")
        if x == 0:
            return self.zero
        raise NeedsFloatBackend(f"arcsin({x}) is irrational")

    def asinh(self, x):
        if x == 0:
            return self.zero
        raise NeedsFloatBackend(f"arcsinh({x}) is irrational")

    def sqrt(self, x):
        if x <= 0:
            raise DomainError(f"sqrt is not analytic at {x}")
        x = mpq(x)
        p, q = x.numerator, x.denominator
        if gmpy2.is_square(p) and gmpy2.is_square(q):
            return mpq(gmpy2.isqrt(p), gmpy2.isqrt(q))
        raise NeedsFloatBackend(f"sqrt({x}) is irrational")


EXACT = ExactBackend()


@lru_cache(maxsize=None)
def _mp_context(precision: int) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = precision
    return ctx


@dataclass(frozen=True)
class FloatBackend:
    """Arbitrary precision binary floats.

    ``tolerance`` is the relative threshold under which a value counts as
    zero (unit checks for division, implicit solving); it defaults to
    ``2**(-precision/2)``.
    """

    precision: int = 256
    tolerance: Any = None

    name = "float"
    exact = False

    def __post_init__(self):
        if self.precision < 128:
            raise ValueError("float backend needs at least 128 bits of precision")
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", Fraction(1, 2 ** (self.precision // 2)))

    @property
    def ctx(self) -> mpmath.MPContext:
        return _mp_context(self.precision)

    @property
    def zero(self):
        return self.ctx.zero

    @property
    def one(self):
        return self.ctx.one

    @property
    def digits(self) -> int:
        return int(self.precision * math.log10(2))

    def scalar(self, value) -> Scalar:
        ctx = self.ctx
        if isinstance(value, str):
            value = value.strip()
            if "/" in value:
                num, den = value.split("/")
                return ctx.mpf(num) / ctx.mpf(den)
            return ctx.mpf(value)
        if isinstance(value, (Fraction, type(mpq(0)))):
            return ctx.mpf(int(value.numerator)) / int(value.denominator)
        return ctx.mpf(value)

    def tol(self):
        return self.scalar(self.tolerance)

    def is_zero(self, x, scale=1) -> bool:
        return abs(x) <= self.tol() * max(1, abs(scale))

    def abs(self, x):
        return abs(x)

    def to_str(self, x) -> str:
        return self.ctx.nstr(x, self.digits, min_fixed=-6, max_fixed=6)

    def to_float(self, x) -> float:
        return float(x)

    def exp(self, x):
        return self.ctx.exp(x)

    def log(self, x):
        if x <= 0:
            raise DomainError(f"log of non-positive value {x}")
        return self.ctx.log(x)

    def sin(self, x):
        return self.ctx.sin(x)

    def cos(self, x):
        return self.ctx.cos(x)

    def asin(self, x):
        if abs(x) >= 1:
            raise DomainError(f"arcsin is not analytic at {x}")
        return self.ctx.asin(x)

    def asinh(self, x):
        return self.ctx.asinh(x)

    def sqrt(self, x):
        if x <= 0:
            raise DomainError(f"sqrt is not analytic at {x}")
        return self.ctx.sqrt(x)


Backend = ExactBackend | FloatBackend


def parse_rational(text: str):
    """Parse ``"p/q"``, an integer, or a decimal literal into an exact ``mpq``."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return mpq(int(num), int(den))
        return mpq(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


def make_backend(name: str = "exact", precision: int = 256, tolerance=None) -> Backend:
    if name == "exact":
        return EXACT
    if name == "float":
        return FloatBackend(precision, tolerance)
    raise ValueError(f"unknown backend {name!r}")
