"""Complexified jets, stored as pairs of real jets ``re + i*im``."""

from __future__ import annotations

from .jet import Jet, JetSpace, _is_scalar


class CJet:
    __slots__ = ("re", "im")

    def __init__(self, re: Jet, im: Jet | None = None):
        if im is None:
            im = re.space.zero(re.order)
        re._compatible(im)
        if re.order != im.order:
            order = min(re.order, im.order)
            re, im = re.truncate(order), im.truncate(order)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, name, value):
        raise AttributeError("CJet is immutable")

    @classmethod
    def const(cls, space: JetSpace, re, im, order: int) -> CJet:
        return cls(space.const(re, order), space.const(im, order))

    @property
    def space(self) -> JetSpace:
        return self.re.space

    @property
    def order(self) -> int:
        return self.re.order

    @property
    def backend(self):
        return self.re.backend

    @property
    def constant(self) -> tuple:
        return self.re.constant, self.im.constant

    def conj(self) -> CJet:
        return CJet(self.re, -self.im)

    def times_i(self) -> CJet:
        return CJet(-self.im, self.re)

    def truncate(self, order: int) -> CJet:
        return CJet(self.re.truncate(order), self.im.truncate(order))

    def is_real(self) -> bool:
        return self.im.is_zero()

    def is_zero(self, tolerance=None) -> bool:
        return self.re.is_zero(tolerance) and self.im.is_zero(tolerance)

    def max_abs(self):
        return max(self.re.max_abs(), self.im.max_abs())

    @staticmethod
    def _lift(other):
        if isinstance(other, CJet):
            return other
        if isinstance(other, Jet):
            return CJet(other)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is not None:
            return CJet(self.re + o.re, self.im + o.im)
        if _is_scalar(other):
            return CJet(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return CJet(-self.re, -self.im)

    def __sub__(self, other):
        o = self._lift(other)
        if o is not None:
            return CJet(self.re - o.re, self.im - o.im)
        if _is_scalar(other):
            return CJet(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CJet):
            a, b, c, d = self.re, self.im, other.re, other.im
            return CJet(a * c - b * d, a * d + b * c)
        if isinstance(other, Jet) or _is_scalar(other):
            return CJet(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def abs2(self) -> Jet:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other):
        if isinstance(other, CJet):
            if other.im.is_zero() and other.backend.exact:
                return CJet(self.re / other.re, self.im / other.re)
            num = self * other.conj()
            den = other.abs2()
            return CJet(num.re / den, num.im / den)
        if isinstance(other, Jet) or _is_scalar(other):
            return CJet(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Jet) or _is_scalar(other):
            return CJet(self.space.const(1, self.order) * other) / self
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = CJet(self.space.const(1, self.order))
        for _ in range(n):
            out = out * self
        return out

    def diff(self, var: str) -> CJet:
        return CJet(self.re.diff(var), self.im.diff(var))

    def __eq__(self, other):
        if not isinstance(other, CJet):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    __hash__ = None

    def __repr__(self):
        return f"CJet(re={self.re.to_poly_str()}, im={self.im.to_poly_str()}; order={self.order})"

    def to_json_dict(self) -> dict:
        return {"re": self.re.to_json_dict(), "im": self.im.to_json_dict()}
