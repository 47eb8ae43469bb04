"""Affine maps acting on graphed curves and surfaces, and their factor laws.

A map of ``R^{n+1}`` acts on the graph ``u = F(x)`` (``n = 1``) or
``u = F(x, y)`` (``n = 2``); the last coordinate is always ``u``.  The image
graph is found by solving the fundamental identity for ``u'`` at jet level::

    u' - F(X(x', u'), ...) = 0

where ``(X, ..., U)`` is the inverse map written in the target coordinates.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from . import affine_invariants as ai
from .errors import GraphConditionError, PreconditionFailed
from .jet import Jet, JetSpace, compose, implicit_solve
from .scalars import EXACT, parse_rational

NEAR_IDENTITY_RADIUS = Fraction(1, 4)
_U = "_u"


def _det(m) -> mpq:
    n = len(m)
    if n == 1:
        return m[0][0]
    total = mpq(0)
    for j in range(n):
        if m[0][j]:
            minor = [row[:j] + row[j + 1 :] for row in m[1:]]
            total += (-1) ** j * m[0][j] * _det(minor)
    return total


def _inverse(m) -> list[list[mpq]]:
    n = len(m)
    a = [list(row) + [mpq(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


@dataclass(frozen=True)
class AffineMap:
    """``X' = M X + t`` on ``R^{n+1}`` with exact rational entries."""

    matrix: tuple
    translation: tuple

    def __post_init__(self):
        m = tuple(tuple(mpq(EXACT.scalar(x)) for x in row) for row in self.matrix)
        t = tuple(mpq(EXACT.scalar(x)) for x in self.translation)
        n = len(m)
        if n not in (2, 3) or any(len(row) != n for row in m) or len(t) != n:
            raise ValueError("affine maps act on R^2 or R^3 (square matrix plus matching translation)")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "translation", t)
        if _det(m) == 0:
            raise PreconditionFailed("delta != 0", "the linear part is singular")

    @classmethod
    def identity(cls, n: int) -> AffineMap:
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), (0,) * n)

    @property
    def size(self) -> int:
        return len(self.matrix)

    @property
    def dim(self) -> int:
        """Dimension of the graphed object (1 for curves, 2 for surfaces)."""
        return self.size - 1

    @property
    def delta(self) -> mpq:
        return _det(self.matrix)

    def deviation(self) -> mpq:
        n = self.size
        return max(abs(self.matrix[i][j] - (i == j)) for i in range(n) for j in range(n))

    def near_identity(self, radius=NEAR_IDENTITY_RADIUS) -> bool:
        return self.deviation() <= mpq(EXACT.scalar(radius))

    def is_identity(self) -> bool:
        return self == AffineMap.identity(self.size)

    def compose(self, other: AffineMap) -> AffineMap:
        """``self o other`` (apply ``other`` first)."""
        if other.size != self.size:
            raise ValueError("cannot compose maps of different sizes")
        n = self.size
        a, b = self.matrix, other.matrix
        m = [[sum((a[i][k] * b[k][j] for k in range(n)), mpq(0)) for j in range(n)] for i in range(n)]
        t = [sum((a[i][k] * other.translation[k] for k in range(n)), mpq(0)) + self.translation[i] for i in range(n)]
        return AffineMap(tuple(map(tuple, m)), tuple(t))

    def inverse(self) -> AffineMap:
        inv = _inverse(self.matrix)
        n = self.size
        t = [-sum((inv[i][k] * self.translation[k] for k in range(n)), mpq(0)) for i in range(n)]
        return AffineMap(tuple(map(tuple, inv)), tuple(t))

    def apply(self, point: Sequence):
        n = self.size
        return tuple(
            sum((self.matrix[i][k] * point[k] for k in range(n)), mpq(0) * point[0]) + self.translation[i]
            for i in range(n)
        )

    def entry(self, name: str) -> mpq:
        """Named entries ``a b c / k l m / p q r`` (3x3) or ``a b / p q`` (2x2)."""
        names = ("abc", "klm", "pqr") if self.size == 3 else ("ab", "pq")
        for i, row in enumerate(names):
            if name in row:
                return self.matrix[i][row.index(name)]
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "matrix": [[EXACT.to_str(x) for x in row] for row in self.matrix],
            "translation": [EXACT.to_str(x) for x in self.translation],
        }

    @classmethod
    def from_json_dict(cls, data) -> AffineMap:
        return cls(
            tuple(tuple(parse_rational(str(x)) for x in row) for row in data["matrix"]),
            tuple(parse_rational(str(x)) for x in data["translation"]),
        )


def random_near_identity(rng: random.Random, size: int, radius=NEAR_IDENTITY_RADIUS, denominator: int = 12,
                         translation: bool = True) -> AffineMap:
    """Random rational map whose matrix entries stay within ``radius`` of the identity."""
    radius = Fraction(radius)
    top = int(radius * denominator)
    m = [[Fraction(int(i == j)) + Fraction(rng.randint(-top, top), denominator) for j in range(size)] for i in range(size)]
    t = [Fraction(rng.randint(-6, 6), 12) if translation else Fraction(0) for _ in range(size)]
    while _det([[mpq(x) for x in row] for row in m]) == 0:
        m[0][0] += Fraction(1, denominator)
    return AffineMap(tuple(map(tuple, m)), tuple(t))


# --------------------------------------------------------------------------
# graph transforms


def _scalar(F: Jet, x):
    return F.backend.scalar(x) if not F.backend.exact else x


def transform_graph(g: AffineMap, F: Jet) -> Jet:
    """Jet of the graphing function of the image of ``{u = F}`` under ``g``.

    The result lives at the image of the base point, in variables with the
    same names as ``F``.
    """
    n = F.space.n
    if g.dim != n:
        raise ValueError(f"a {g.size}x{g.size} map acts on graphs over {g.dim} variables, got {n}")
    be = F.backend
    point = tuple(F.base) + (F.constant,)
    image = [
        sum((point[k] * _scalar(F, g.matrix[i][k]) for k in range(n + 1)), be.zero) + _scalar(F, g.translation[i])
        for i in range(n + 1)
    ]
    space = JetSpace(tuple(F.vars) + (_U,), tuple(image), be)
    inv = g.inverse()
    t = [space.var(v, F.order) for v in space.vars]
    rows = []
    for i in range(n + 1):
        acc = space.const(_scalar(F, inv.translation[i]), F.order)
        for k in range(n + 1):
            c = inv.matrix[i][k]
            if c:
                acc = acc + t[k] * _scalar(F, c)
        rows.append(acc)
    subs = dict(zip(F.vars, rows[:n]))
    G = rows[n] - compose(F, subs)
    try:
        return implicit_solve(G, _U)
    except PreconditionFailed as exc:
        raise GraphConditionError(exc.detail) from exc


def pullback(Fp: Jet, g: AffineMap, F: Jet) -> Jet:
    """``Fp(Phi(x))`` where ``Phi`` maps the base coordinates of the graph of ``F``
    to those of its image, ``Phi = (A, B)`` restricted to ``u = F``."""
    rows = _source_rows(g, F)
    return compose(Fp, dict(zip(Fp.vars, rows)))


def _source_rows(g: AffineMap, F: Jet) -> list[Jet]:
    """``A, B, (C)``: the target coordinates as functions on the source graph."""
    n = F.space.n
    coords = [F.space.var(v, F.order) for v in F.vars] + [F]
    out = []
    for i in range(n + 1):
        acc = F.space.const(_scalar(F, g.translation[i]), F.order)
        for k in range(n + 1):
            c = g.matrix[i][k]
            if c:
                acc = acc + coords[k] * _scalar(F, c)
        out.append(acc)
    return out


# --------------------------------------------------------------------------
# factors


@dataclass
class Factors:
    Lambda: Jet
    Upsilon: Jet | None
    mu: Jet
    delta: object


def factors(g: AffineMap, F: Jet, Fp: Jet | None = None) -> Factors:
    """Lambda, Upsilon, mu' (pulled back to the source) and delta.

    For curves ``Lambda = a + b F_x`` and ``Upsilon`` is None.
    """
    if Fp is None:
        Fp = transform_graph(g, F)
    n = F.space.n
    s = lambda name: _scalar(F, g.entry(name))
    if n == 1:
        x = F.vars[0]
        Fx = F.diff(x)
        Lam = Fx * s("b") + s("a")
        mu = pullback(Fp.diff(Fp.vars[0]), g, F) * (-s("b")) + s("q")
        return Factors(Lam, None, mu, g.delta)
    x, y = F.vars
    Fx, Fy = F.diff(x), F.diff(y)
    a, b, c, k, l, m, r = (s(ch) for ch in "abcklmr")
    Lam = Fx * (c * l - b * m) + Fy * (a * m - c * k) + (a * l - b * k)
    Fxx, Fxy = Fx.diff(x), Fx.diff(y)
    Ups = (Fy * m + l).truncate(F.order - 2) * Fxx - (Fx * m + k).truncate(F.order - 2) * Fxy
    mu = r - pullback(Fp.diff(Fp.vars[0]), g, F) * c - pullback(Fp.diff(Fp.vars[1]), g, F) * m
    if Lam.constant == 0 or mu.constant == 0:
        raise GraphConditionError("Lambda or mu' vanishes at the base point")
    return Factors(Lam, Ups, mu, g.delta)


# --------------------------------------------------------------------------
# transformation laws


@dataclass
class LawCheck:
    law: str
    residuals: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())

    @property
    def order(self) -> int:
        return min(r.order for r in self.residuals.values())

    def to_json_dict(self) -> dict:
        return {
            "law": self.law,
            "ok": self.ok,
            "order": self.order,
            "residuals": {k: r.to_json_dict() for k, r in sorted(self.residuals.items())},
        }


def _diff(a: Jet, b: Jet) -> Jet:
    n = min(a.order, b.order)
    return a.truncate(n) - b.truncate(n)


def _need_rank_one(F: Jet):
    G = ai.as_graph(F)
    if not G.fxx_nonzero:
        raise PreconditionFailed("F_xx != 0", "F_xx vanishes at the base point")
    if not G.hessian_zero:
        raise PreconditionFailed("hessian == 0", "the Hessian does not vanish identically to the jet order")


def _law_hessian(g, F, Fp, fa):
    lhs = pullback(ai.hessian_det(Fp), g, F)
    rhs = ai.hessian_det(F) * (fa.delta**2) / fa.Lambda**4
    return {"residual": _diff(lhs, rhs)}


def _law_fxx(g, F, Fp, fa):
    _need_rank_one(F)
    lhs = pullback(ai.as_graph(Fp).d(2, 0), g, F)
    Fxx = ai.as_graph(F).d(2, 0)
    rhs = fa.Upsilon**2 * fa.delta / (fa.Lambda**3 * Fxx)
    return {"residual": _diff(lhs, rhs)}


def _law_s_aff(g, F, Fp, fa):
    _need_rank_one(F)
    lhs = pullback(ai.s_aff(Fp), g, F)
    Fxx = ai.as_graph(F).d(2, 0)
    rhs = Fxx / fa.Upsilon * ai.s_aff(F)
    return {"residual": _diff(lhs, rhs)}


def _law_s_num(g, F, Fp, fa):
    _need_rank_one(F)
    lhs = pullback(ai.s_aff_numerator(Fp), g, F)
    Fxx = ai.as_graph(F).d(2, 0)
    rhs = ai.s_aff_numerator(F) * fa.delta**2 * fa.Upsilon**3 / (fa.Lambda**6 * Fxx**3)
    return {"residual": _diff(lhs, rhs)}


def _law_w_num(g, F, Fp, fa):
    _need_rank_one(F)
    lhs = pullback(ai.w_aff_numerator(Fp), g, F)
    Fxx = ai.as_graph(F).d(2, 0)
    rhs = ai.w_aff_numerator(F) * fa.delta**3 * fa.Upsilon**6 / (Fxx**6 * fa.Lambda**10)
    return {"residual": _diff(lhs, rhs)}


def _law_hessian_matrix(g, F, Fp, fa):
    A, B, _ = _source_rows(g, F)
    x, y = F.vars
    M = [[A.diff(x), B.diff(x)], [A.diff(y), B.diff(y)]]
    Hp = [[pullback(e, g, F) for e in row] for row in ai.hessian_matrix(Fp)]
    H = ai.hessian_matrix(F)
    out = {}
    for i in range(2):
        for j in range(2):
            acc = None
            for s in range(2):
                for t in range(2):
                    term = M[i][s] * Hp[s][t] * M[j][t]
                    acc = term if acc is None else acc + term
            out[f"H[{i}][{j}]"] = _diff(acc, fa.mu * H[i][j])
    return out


def _law_contact_form(g, F, Fp, fa):
    """``rho' = mu' rho`` on the source graph, componentwise in ``dx, dy, du``."""
    Fpx = pullback(Fp.diff(Fp.vars[0]), g, F)
    Fpy = pullback(Fp.diff(Fp.vars[1]), g, F)
    x, y = F.vars
    rho = [-F.diff(x), -F.diff(y), F.space.const(1, F.order - 1)]
    out = {}
    for col, name in enumerate(("dx", "dy", "du")):
        a, k, p = (_scalar(F, g.matrix[i][col]) for i in range(3))
        rho_p = Fpx * (-a) - Fpy * k + p
        out[name] = _diff(rho_p, fa.mu * rho[col])
    return out


def _law_fxx_1d(g, F, Fp, fa):
    lhs = pullback(ai.as_graph(Fp).dx(2), g, F)
    rhs = ai.as_graph(F).dx(2) * fa.delta * fa.Lambda**-3
    return {"residual": _diff(lhs, rhs)}


def _law_halphen(g, F, Fp, fa):
    lhs = pullback(ai.halphen(Fp), g, F)
    rhs = ai.halphen(F) * fa.delta**2 * fa.Lambda**-8
    return {"residual": _diff(lhs, rhs)}


def _law_monge(g, F, Fp, fa):
    lhs = pullback(ai.monge(Fp), g, F)
    rhs = ai.monge(F) * fa.delta**3 * fa.Lambda**-12
    return {"residual": _diff(lhs, rhs)}


SURFACE_LAWS = {
    "hessian": _law_hessian,
    "fxx": _law_fxx,
    "s_aff": _law_s_aff,
    "s_aff_numerator": _law_s_num,
    "w_numerator": _law_w_num,
    "hessian_matrix": _law_hessian_matrix,
    "contact_form": _law_contact_form,
}
CURVE_LAWS = {
    "fxx_1d": _law_fxx_1d,
    "halphen": _law_halphen,
    "monge": _law_monge,
}
LAWS = {**SURFACE_LAWS, **CURVE_LAWS}


def verify_law(law_id: str, g: AffineMap, F: Jet, Fp: Jet | None = None) -> LawCheck:
    """Residual jets ``LHS - factor * RHS`` of one transformation law."""
    if law_id not in LAWS:
        raise KeyError(f"unknown law {law_id!r}; known: {sorted(LAWS)}")
    n = F.space.n
    if (n == 1) != (law_id in CURVE_LAWS):
        raise PreconditionFailed(f"dim == {2 if law_id in SURFACE_LAWS else 1}", f"law {law_id} does not apply to this graph")
    if Fp is None:
        Fp = transform_graph(g, F)
    fa = factors(g, F, Fp)
    return LawCheck(law_id, LAWS[law_id](g, F, Fp, fa))


def applicable_laws(F: Jet) -> list[str]:
    """Laws whose hypotheses hold on ``F``."""
    if F.space.n == 1:
        return sorted(CURVE_LAWS)
    G = ai.as_graph(F)
    out = ["contact_form", "hessian", "hessian_matrix"]
    if G.fxx_nonzero and G.hessian_zero:
        out += ["fxx", "s_aff_numerator", "w_numerator"]
        if G.s_num_nonzero:
            out.append("s_aff")
    return sorted(out)
