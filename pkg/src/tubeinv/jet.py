"""Truncated multivariate Taylor jets.

A :class:`Jet` of order ``N`` in variables ``(x1, ..., xn)`` at a base point
``b`` stores the Taylor coefficients of ``f(b + t)`` for every monomial
``t**alpha`` with ``|alpha| <= N``.  Coefficients live in a flat tuple in
graded-lex order: by total degree, then lexicographically descending
exponent vectors (``x**2, x*y, y**2``).  Because that order is graded, the
index of a monomial does not depend on the truncation order, so truncation
is a slice and every lookup table is shared between orders.

Variable names denote displacements from the base point: ``x`` in a jet at
base ``x0 = -1`` is the function ``x0 + t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from . import elementary
from .errors import NonUnitDivisor, OrderTooLow, PreconditionFailed, VariableMismatch
from .scalars import EXACT, Backend, FloatBackend, make_backend

MultiIndex = tuple


# --------------------------------------------------------------------------
# monomial tables


def _monos_of_degree(n: int, d: int) -> list[tuple[int, ...]]:
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in _monos_of_degree(n - 1, d - first):
            out.append((first,) + rest)
    return out


@lru_cache(maxsize=None)
def monomials(n: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All exponent vectors of degree <= order, in graded-lex order."""
    out: list[tuple[int, ...]] = []
    for d in range(order + 1):
        out.extend(_monos_of_degree(n, d))
    return tuple(out)


def count(n: int, order: int) -> int:
    """Number of monomials of degree <= order in n variables."""
    if order < 0:
        return 0
    return math.comb(n + order, n)


@lru_cache(maxsize=None)
def _index(n: int, order: int) -> dict:
    return {m: i for i, m in enumerate(monomials(n, order))}


def index_of(alpha: Sequence[int]) -> int:
    alpha = tuple(alpha)
    return _index(len(alpha), sum(alpha))[alpha]


def graded_key(alpha: Sequence[int]):
    """Sort key realising the graded-lex order used for storage."""
    return (sum(alpha), tuple(-a for a in alpha))


@lru_cache(maxsize=None)
def _degrees(n: int, order: int) -> tuple[int, ...]:
    return tuple(sum(m) for m in monomials(n, order))


@lru_cache(maxsize=None)
def _shift_table(n: int, order: int) -> tuple[tuple[int, ...], ...]:
    """``table[i][j]`` is the index of ``mono_i + mono_j``.

    Row ``i`` only covers ``j`` with ``deg(i) + deg(j) <= order``; thanks to
    the graded order that is a prefix of the monomial list.
    """
    monos = monomials(n, order)
    idx = _index(n, order)
    rows = []
    for a in monos:
        lim = count(n, order - sum(a))
        rows.append(tuple(idx[tuple(p + q for p, q in zip(a, monos[j]))] for j in range(lim)))
    return tuple(rows)


@lru_cache(maxsize=None)
def _diff_table(n: int, order: int, pos: int) -> tuple[tuple[int, int, int], ...]:
    """(source index, factor, target index) triples for d/dx_pos."""
    idx = _index(n, order)
    out = []
    for i, m in enumerate(monomials(n, order)):
        e = m[pos]
        if e:
            t = m[:pos] + (e - 1,) + m[pos + 1 :]
            out.append((i, e, idx[t]))
    return tuple(out)


# --------------------------------------------------------------------------
# jet space


@dataclass(frozen=True)
class JetSpace:
    """Variables, base point and scalar backend shared by compatible jets."""

    vars: tuple[str, ...]
    base: tuple
    backend: Backend = EXACT

    def __post_init__(self):
        vars_ = tuple(self.vars)
        if len(set(vars_)) != len(vars_):
            raise VariableMismatch(f"duplicate variable names in {vars_}")
        base = self.base
        if base is None:
            base = (0,) * len(vars_)
        elif isinstance(base, Mapping):
            base = tuple(base.get(v, 0) for v in vars_)
        if len(base) != len(vars_):
            raise VariableMismatch("base point dimension does not match variables")
        object.__setattr__(self, "vars", vars_)
        object.__setattr__(self, "base", tuple(self.backend.scalar(b) for b in base))

    @property
    def n(self) -> int:
        return len(self.vars)

    def position(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise VariableMismatch(f"unknown variable {var!r}; jet variables are {self.vars}") from None

    def base_of(self, var: str):
        return self.base[self.position(var)]

    def zero(self, order: int) -> Jet:
        z = self.backend.zero
        return Jet(self, order, (z,) * count(self.n, order))

    def const(self, value, order: int) -> Jet:
        z = self.backend.zero
        coeffs = [z] * count(self.n, order)
        coeffs[0] = self.backend.scalar(value)
        return Jet(self, order, tuple(coeffs))

    def var(self, name: str, order: int) -> Jet:
        """The coordinate function ``name`` (base value plus displacement)."""
        pos = self.position(name)
        coeffs = [self.backend.zero] * count(self.n, order)
        coeffs[0] = self.base[pos]
        if order >= 1:
            e = [0] * self.n
            e[pos] = 1
            coeffs[index_of(e)] = self.backend.one
        return Jet(self, order, tuple(coeffs))

    def from_dict(self, coeffs: Mapping, order: int) -> Jet:
        """Jet from ``{exponent tuple: value}``; missing monomials are zero."""
        out = [self.backend.zero] * count(self.n, order)
        for alpha, value in coeffs.items():
            alpha = tuple(alpha)
            if len(alpha) != self.n:
                raise VariableMismatch(f"multi-index {alpha} has wrong length")
            if sum(alpha) <= order:
                out[index_of(alpha)] = self.backend.scalar(value)
        return Jet(self, order, tuple(out))

    def with_backend(self, backend: Backend) -> JetSpace:
        src = self.backend
        return JetSpace(self.vars, tuple(_convert(b, src, backend) for b in self.base), backend)

    def without(self, var: str) -> JetSpace:
        pos = self.position(var)
        return JetSpace(self.vars[:pos] + self.vars[pos + 1 :], self.base[:pos] + self.base[pos + 1 :], self.backend)


def _convert(x, src: Backend, dst: Backend):
    if src == dst:
        return x
    if isinstance(src, FloatBackend) and dst.exact:
        raise TypeError("refusing to convert float values to the exact backend")
    return dst.scalar(x)


# --------------------------------------------------------------------------
# jets


class Jet:
    """Immutable truncated Taylor expansion.  See the module docstring."""

    __slots__ = ("space", "order", "coeffs")

    def __init__(self, space: JetSpace, order: int, coeffs: Sequence):
        if order < 0:
            raise OrderTooLow("jet order must be >= 0")
        coeffs = tuple(coeffs)
        if len(coeffs) != count(space.n, order):
            raise ValueError("coefficient table is not dense for this order")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    # -- convenience accessors

    @property
    def vars(self) -> tuple[str, ...]:
        return self.space.vars

    @property
    def base(self) -> tuple:
        return self.space.base

    @property
    def backend(self) -> Backend:
        return self.space.backend

    @property
    def constant(self):
        return self.coeffs[0]

    def coeff(self, alpha: Sequence[int]):
        """Taylor coefficient of ``t**alpha`` (zero above the order is an error)."""
        alpha = tuple(alpha)
        if len(alpha) != self.space.n:
            raise VariableMismatch(f"multi-index {alpha} has wrong length")
        if sum(alpha) > self.order:
            raise OrderTooLow(f"coefficient {alpha} is above the jet order {self.order}")
        return self.coeffs[index_of(alpha)]

    __getitem__ = coeff

    def derivative_value(self, alpha: Sequence[int]):
        """The partial derivative ``d^alpha f`` at the base point."""
        factor = 1
        for a in alpha:
            factor *= math.factorial(a)
        return self.coeff(alpha) * factor

    def items(self) -> Iterable[tuple[tuple[int, ...], object]]:
        return zip(monomials(self.space.n, self.order), self.coeffs)

    # -- structure

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise OrderTooLow(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet(self.space, order, self.coeffs[: count(self.space.n, order)])

    def _compatible(self, other: Jet):
        if other.space != self.space:
            if other.vars != self.vars:
                raise VariableMismatch(f"variables {self.vars} vs {other.vars}")
            if other.backend != self.backend:
                raise VariableMismatch("jets use different scalar backends")
            raise VariableMismatch("jets are expanded at different base points")

    def _scalar(self, value):
        return self.backend.scalar(value)

    def is_zero(self, tolerance=None) -> bool:
        """Exact zero (exact backend) or every coefficient below tolerance."""
        if self.backend.exact:
            return not any(self.coeffs)
        tol = self.backend.scalar(self.backend.tolerance if tolerance is None else tolerance)
        return all(abs(c) <= tol for c in self.coeffs)

    def max_abs(self):
        return max((abs(c) for c in self.coeffs), default=self.backend.zero)

    def first_nonzero(self, tolerance=None):
        """``(multi-index, value)`` of the graded-lex-first nonzero coefficient, or None."""
        tol = None
        if not self.backend.exact:
            tol = self.backend.scalar(self.backend.tolerance if tolerance is None else tolerance)
        for alpha, c in self.items():
            if (c != 0) if tol is None else (abs(c) > tol):
                return alpha, c
        return None

    # -- arithmetic

    def __add__(self, other):
        if isinstance(other, Jet):
            self._compatible(other)
            order = min(self.order, other.order)
            m = count(self.space.n, order)
            return Jet(self.space, order, tuple(a + b for a, b in zip(self.coeffs[:m], other.coeffs[:m])))
        if _is_scalar(other):
            c = list(self.coeffs)
            c[0] = c[0] + self._scalar(other)
            return Jet(self.space, self.order, c)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, self.order, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._compatible(other)
            order = min(self.order, other.order)
            m = count(self.space.n, order)
            return Jet(self.space, order, tuple(a - b for a, b in zip(self.coeffs[:m], other.coeffs[:m])))
        if _is_scalar(other):
            return self + (-self._scalar(other))
        return NotImplemented

    def __rsub__(self, other):
        if _is_scalar(other):
            return (-self) + other
        return NotImplemented

    def scale(self, factor) -> Jet:
        f = self._scalar(factor)
        return Jet(self.space, self.order, tuple(a * f for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._compatible(other)
            return _mul(self, other)
        if _is_scalar(other):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._compatible(other)
            return _div(self, other)
        if _is_scalar(other):
            d = self._scalar(other)
            if d == 0:
                raise NonUnitDivisor("division by zero scalar")
            return Jet(self.space, self.order, tuple(a / d for a in self.coeffs))
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_scalar(other):
            return _div(self.space.const(other, self.order), self)
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return 1 / (self ** (-n))
        result = self.space.const(1, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def reciprocal(self) -> Jet:
        return 1 / self

    def diff(self, var: str) -> Jet:
        """Formal partial derivative; the order drops by one."""
        pos = self.space.position(var)
        if self.order == 0:
            raise OrderTooLow("cannot differentiate a jet of order 0")
        z = self.backend.zero
        out = [z] * count(self.space.n, self.order - 1)
        c = self.coeffs
        for src, f, dst in _diff_table(self.space.n, self.order, pos):
            if c[src]:
                out[dst] = c[src] * f
        return Jet(self.space, self.order - 1, out)

    def partial(self, alpha: Sequence[int]) -> Jet:
        """Mixed partial derivative ``d^alpha``."""
        out = self
        for v, e in zip(self.vars, alpha):
            for _ in range(e):
                out = out.diff(v)
        return out

    # -- comparison and display

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return self.space == other.space and self.order == other.order and self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self):
        return f"Jet({self.to_poly_str()}; order={self.order}, base={dict(zip(self.vars, map(self.backend.to_str, self.base)))})"

    def to_poly_str(self) -> str:
        terms = []
        for alpha, c in self.items():
            if not c:
                continue
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in zip(self.vars, alpha) if e)
            cs = self.backend.to_str(c)
            if not mono:
                terms.append(cs)
            elif cs == "1":
                terms.append(mono)
            elif cs == "-1":
                terms.append("-" + mono)
            else:
                terms.append(f"{cs}*{mono}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"

    # -- conversion

    def with_backend(self, backend: Backend) -> Jet:
        space = self.space.with_backend(backend)
        return Jet(space, self.order, tuple(_convert(c, self.backend, backend) for c in self.coeffs))

    def to_json_dict(self, nonzero_only: bool = True) -> dict:
        """Serialise to the JSON jet format (rationals as exact strings)."""
        b = self.backend
        coeffs = {
            ",".join(map(str, alpha)): b.to_str(c) for alpha, c in self.items() if (c or not nonzero_only)
        }
        return {
            "vars": list(self.vars),
            "order": self.order,
            "base": {v: b.to_str(x) for v, x in zip(self.vars, self.base)},
            "backend": b.name if b.exact else {"float": b.precision},
            "coeffs": coeffs,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping, backend: Backend | None = None) -> Jet:
        if backend is None:
            spec = data.get("backend", "exact")
            backend = make_backend("float", spec["float"]) if isinstance(spec, Mapping) else make_backend(spec)
        vars_ = tuple(data["vars"])
        base = data.get("base") or {}
        space = JetSpace(vars_, tuple(base.get(v, "0") for v in vars_), backend)
        parsed = {}
        for key, value in data.get("coeffs", {}).items():
            alpha = tuple(int(p) for p in key.split(",")) if key != "" else ()
            parsed[alpha] = value
        return space.from_dict(parsed, int(data["order"]))


def _is_scalar(x) -> bool:
    return not isinstance(x, (Jet, str)) and not hasattr(x, "re")


def _mul(a: Jet, b: Jet) -> Jet:
    order = min(a.order, b.order)
    n = a.space.n
    m = count(n, order)
    ca, cb = a.coeffs[:m], b.coeffs[:m]
    nza = [i for i in range(m) if ca[i]]
    nzb = [j for j in range(m) if cb[j]]
    out = [a.backend.zero] * m
    if nza and nzb:
        shift = _shift_table(n, order)
        for i in nza:
            ai = ca[i]
            row = shift[i]
            lim = len(row)
            for j in nzb:
                if j >= lim:
                    break
                k = row[j]
                out[k] = out[k] + ai * cb[j]
    return Jet(a.space, order, out)


def _unit_check(b: Jet, what: str = "divisor"):
    b0 = b.coeffs[0]
    be = b.backend
    scale = b.max_abs() if not be.exact else 1
    if b0 == 0 or (not be.exact and be.is_zero(b0, scale)):
        raise NonUnitDivisor(f"{what} has vanishing constant term")
    return b0


def _div(a: Jet, b: Jet) -> Jet:
    """Degree-by-degree long division ``q`` with ``q*b = a``."""
    order = min(a.order, b.order)
    n = a.space.n
    m = count(n, order)
    b0 = _unit_check(b)
    cb = b.coeffs[:m]
    nzb = [j for j in range(1, m) if cb[j]]
    acc = list(a.coeffs[:m])
    shift = _shift_table(n, order)
    q = [a.backend.zero] * m
    for k in range(m):
        qk = acc[k] / b0
        q[k] = qk
        if qk:
            row = shift[k]
            lim = len(row)
            for j in nzb:
                if j >= lim:
                    break
                t = row[j]
                acc[t] = acc[t] - cb[j] * qk
    return Jet(a.space, order, q)


# --------------------------------------------------------------------------
# module-level operations


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_neg(a: Jet) -> Jet:
    return -a


def jet_scale(a: Jet, factor) -> Jet:
    return a.scale(factor)


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_div(a: Jet, b: Jet) -> Jet:
    return a / b


def jet_diff(a: Jet, var: str) -> Jet:
    return a.diff(var)


def _near(x, y, backend: Backend) -> bool:
    if backend.exact:
        return x == y
    return backend.is_zero(x - y, max(abs(x), abs(y)))


def compose(outer: Jet, subs: Mapping[str, Jet]) -> Jet:
    """Substitute jets for the variables of ``outer``.

    Every variable of ``outer`` must be given, all substituted jets must share
    one space, and the constant term of ``subs[v]`` must equal the base value
    of ``v`` in ``outer`` (so the displacements have no constant term).
    The result has order ``min(outer.order, order of the substitutions)``.
    """
    missing = [v for v in outer.vars if v not in subs]
    if missing:
        raise VariableMismatch(f"no substitution given for {missing}")
    inner = [subs[v] for v in outer.vars]
    if not inner:
        raise VariableMismatch("cannot compose a jet without variables")
    target = inner[0].space
    for j in inner:
        if j.space != target:
            raise VariableMismatch("substituted jets live in different spaces")
    if target.backend != outer.backend:
        raise VariableMismatch("outer jet and substitutions use different backends")
    order = min(outer.order, min(j.order for j in inner))
    ts = []
    for v, j in zip(outer.vars, inner):
        b = outer.space.base_of(v)
        if not _near(j.constant, b, outer.backend):
            raise PreconditionFailed("compose", f"substitution for {v} does not pass through the base point")
        t = j.truncate(order) - j.constant
        ts.append(t)
    n = outer.space.n
    powers = []
    for t in ts:
        row = [target.const(1, order)]
        for _ in range(order):
            row.append(row[-1] * t)
        powers.append(row)
    table = dict(zip(monomials(n, outer.order), outer.coeffs))

    def evaluate(level: int, prefix: tuple, budget: int) -> Jet | None:
        if level == n - 1:
            acc = None
            for e in range(budget + 1):
                c = table.get(prefix + (e,))
                if c:
                    term = powers[level][e].scale(c)
                    acc = term if acc is None else acc + term
            return acc
        acc = None
        for e in range(budget + 1):
            sub = evaluate(level + 1, prefix + (e,), budget - e)
            if sub is None:
                continue
            term = sub if e == 0 else powers[level][e] * sub
            acc = term if acc is None else acc + term
        return acc

    result = evaluate(0, (), order)
    return target.zero(order) if result is None else result


def implicit_solve(G: Jet, unknown: str) -> Jet:
    """Solve ``G(vars, u(vars)) = 0`` for the jet of ``u``, degree by degree.

    ``G`` is a jet in ``vars + [unknown]``; its base value for ``unknown`` is
    the value of the solution at the base point.  Requires ``G(base) = 0`` and
    ``dG/du(base) != 0``.
    """
    space = G.space
    pos = space.position(unknown)
    be = G.backend
    scale = G.max_abs()
    if not (G.constant == 0 if be.exact else be.is_zero(G.constant, scale)):
        raise PreconditionFailed("G(base) = 0", f"residual {be.to_str(G.constant)} at the base point")
    if G.order < 1:
        raise OrderTooLow("implicit_solve needs a jet of order >= 1")
    e_u = [0] * space.n
    e_u[pos] = 1
    g1 = G.coeff(e_u)
    if g1 == 0 or (not be.exact and be.is_zero(g1, scale)):
        raise PreconditionFailed("dG/du != 0", "degenerate derivative in the unknown")
    out_space = space.without(unknown)
    N = G.order
    # G(x, u0 + t) = sum_k g_k(x) t^k
    parts: list[dict] = [dict() for _ in range(N + 1)]
    for alpha, c in G.items():
        if c:
            rest = alpha[:pos] + alpha[pos + 1 :]
            parts[alpha[pos]][rest] = c
    m_out = out_space.n
    w = [be.zero] * count(m_out, N)
    for d in range(1, N + 1):
        wj = Jet(out_space, d, w[: count(m_out, d)])
        acc = out_space.from_dict(parts[d], d) if d <= N else out_space.zero(d)
        for k in range(d - 1, -1, -1):
            acc = acc * wj + out_space.from_dict(parts[k], d)
        lo, hi = count(m_out, d - 1), count(m_out, d)
        for i in range(lo, hi):
            w[i] = -acc.coeffs[i] / g1
    u0 = space.base[pos]
    return Jet(out_space, N, w) + u0


def analytic_lift(fn: str, a: Jet, exponent: int | None = None) -> Jet:
    """Jet of ``fn(a)`` for ``fn`` in exp, log, sin, cos, arcsin, arcsinh, sqrt, pow_int."""
    if fn == "pow_int":
        if exponent is None:
            raise ValueError("pow_int needs an integer exponent")
        return a**exponent
    coeffs = elementary.taylor_coefficients(fn, a.constant, a.order, a.backend)
    t = a - a.constant
    out = a.space.const(coeffs[-1], a.order)
    for c in reversed(coeffs[:-1]):
        out = out * t + c
    return out
