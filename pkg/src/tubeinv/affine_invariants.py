"""Affine relative invariants of graphed curves ``u = F(x)`` and surfaces ``u = F(x, y)``.

Every invariant is returned as a jet so that identical vanishing up to the
available order is a finite coefficient check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable

from . import formulas
from .diffalg import DiffAlgebra, DiffRational, Poly
from .errors import OrderTooLow, PreconditionFailed
from .jet import Jet

EXACT_ZERO = "exact-zero"
BELOW_TOLERANCE = "below-tolerance"
NONZERO = "nonzero"
PRECONDITION_FAILED = "precondition-failed"

DEFAULT_FLOAT_TOLERANCE = Fraction(1, 10**40)


# --------------------------------------------------------------------------
# graph surfaces


@dataclass(frozen=True)
class GraphSurface:
    """The graph ``u = F`` of a jet over ``n >= 1`` base variables.

    Flags are derived from the jet on demand and never taken from input.
    """

    jet: Jet

    def __post_init__(self):
        if self.jet.space.n < 1:
            raise ValueError("graph needs at least one base variable")

    @property
    def dim(self) -> int:
        return self.jet.space.n

    @property
    def order(self) -> int:
        return self.jet.order

    @property
    def backend(self):
        return self.jet.backend

    @cached_property
    def _partials(self) -> dict:
        return {(0,) * self.dim: self.jet}

    def d(self, *alpha: int) -> Jet:
        """Partial derivative jet, e.g. ``F.d(2, 1)`` for ``F_xxy``."""
        alpha = tuple(alpha)
        if len(alpha) != self.dim:
            raise ValueError(f"expected {self.dim} exponents, got {alpha}")
        if sum(alpha) > self.order:
            raise OrderTooLow(f"F_{alpha} needs a jet of order >= {sum(alpha)}")
        cache = self._partials
        if alpha not in cache:
            i = max(i for i, a in enumerate(alpha) if a)
            prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
            cache[alpha] = self.d(*prev).diff(self.jet.vars[i])
        return cache[alpha]

    def dx(self, k: int) -> Jet:
        """``k``-th derivative in the first variable."""
        return self.d(k, *([0] * (self.dim - 1)))

    def value(self, *alpha: int):
        return self.jet.derivative_value(alpha)

    def _nonzero(self, x) -> bool:
        be = self.backend
        return x != 0 if be.exact else not be.is_zero(x, self.jet.max_abs())

    @cached_property
    def fxx_nonzero(self) -> bool:
        return self.order >= 2 and self._nonzero(self.dx(2).constant)

    @cached_property
    def hessian_zero(self) -> bool:
        return self.dim == 2 and self.order >= 2 and hessian_det(self).is_zero()

    @cached_property
    def s_num_nonzero(self) -> bool:
        return self.dim == 2 and self.order >= 3 and self._nonzero(s_aff_numerator(self).constant)

    def flags(self) -> dict:
        out = {"F_xx!=0": self.fxx_nonzero}
        if self.dim == 2:
            out["hessian==0"] = self.hessian_zero
            out["S_num!=0"] = self.s_num_nonzero
        return out


def as_graph(F) -> GraphSurface:
    return F if isinstance(F, GraphSurface) else GraphSurface(F)


def _need(F: GraphSurface, order: int, dim: int | None = None):
    if dim is not None and F.dim != dim:
        raise PreconditionFailed(f"dim == {dim}", f"graph has {F.dim} base variables")
    if F.order < order:
        raise OrderTooLow(f"needs a jet of order >= {order}, got {F.order}")


def _need_fxx(F: GraphSurface):
    if not F.fxx_nonzero:
        raise PreconditionFailed("F_xx != 0", "F_xx vanishes at the base point")


def _need_snum(F: GraphSurface):
    if not F.s_num_nonzero:
        raise PreconditionFailed("S_num != 0", "F_xx F_xxy - F_xy F_xxx vanishes at the base point")


# --------------------------------------------------------------------------
# determinants and signature


def det(matrix: list[list]):
    """Determinant by cofactor expansion (fine for the small sizes used here)."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    total = None
    for j in range(n):
        a = matrix[0][j]
        if isinstance(a, (int, Fraction)) and a == 0:
            continue
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = a * det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return matrix[1][0] * 0
    return total


def bordered_hessian(rho: Jet) -> Jet:
    """Determinant of the Hessian of ``rho`` bordered by its gradient."""
    if rho.order < 2:
        raise OrderTooLow("bordered Hessian needs order >= 2")
    vs = rho.vars
    grad = [rho.diff(v) for v in vs]
    hess = [[g.diff(w) for w in vs] for g in grad]
    zero = rho.space.zero(rho.order - 2)
    rows = [[zero] + [g.truncate(rho.order - 2) for g in grad]]
    for i in range(len(vs)):
        rows.append([grad[i].truncate(rho.order - 2)] + hess[i])
    return det(rows)


def hessian_matrix(F) -> list[list[Jet]]:
    F = as_graph(F)
    _need(F, 2)
    n = F.dim
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            row.append(F.d(*alpha))
        out.append(row)
    return out


def hessian_det(F) -> Jet:
    """``F_xx F_yy - F_xy**2`` (or ``F_xx`` for curves)."""
    F = as_graph(F)
    _need(F, 2)
    return det(hessian_matrix(F))


def signature(matrix: list[list], is_zero: Callable) -> tuple[int, int, int]:
    """``(positive, negative, zero)`` counts of a symmetric scalar matrix.

    Symmetric Gaussian elimination (congruence).  A zero diagonal pivot is
    replaced by searching the remaining diagonal; if the whole remaining
    diagonal vanishes but an off-diagonal entry does not, row/column ``j`` is
    added to ``i`` to create a nonzero diagonal entry.
    """
    a = [list(row) for row in matrix]
    n = len(a)
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if not is_zero(a[i][i])), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i != j and not is_zero(a[i][j])), None)
            if pair is None:
                break
            i, j = pair
            for r in range(n):
                a[i][r] = a[i][r] + a[j][r]
            for r in range(n):
                a[r][i] = a[r][i] + a[r][j]
            piv = i
            if is_zero(a[i][i]):
                # a_ii + 2 a_ij + a_jj with a_ii = a_jj = 0 is 2 a_ij != 0
                break
        p = a[piv][piv]
        if p > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for i in active:
            f = a[i][piv] / p
            for j in active:
                a[i][j] = a[i][j] - f * a[piv][j]
        for i in active:
            a[i][piv] = a[piv][i] = p * 0
    return pos, neg, n - pos - neg


def hessian_signature(F) -> tuple[int, int, int]:
    """Signature ``(p, q, zero)`` of the Hessian matrix at the base point."""
    F = as_graph(F)
    _need(F, 2)
    mat = [[e.constant for e in row] for row in hessian_matrix(F)]
    be = F.backend
    scale = max((abs(x) for row in mat for x in row), default=0)
    return signature(mat, lambda x: x == 0 if be.exact else be.is_zero(x, scale))


# --------------------------------------------------------------------------
# curves


def halphen(F) -> Jet:
    """``3 F_xx F_xxxx - 5 F_xxx**2``."""
    F = as_graph(F)
    _need(F, 4, dim=1)
    _need_fxx(F)
    f2, f3, f4 = F.dx(2), F.dx(3), F.dx(4)
    return 3 * f2 * f4 - 5 * f3 * f3


def monge(F) -> Jet:
    """``9 F_xx**2 F_xxxxx - 45 F_xx F_xxx F_xxxx + 40 F_xxx**3`` (x-derivatives)."""
    F = as_graph(F)
    _need(F, 5)
    _need_fxx(F)
    f2, f3, f4, f5 = F.dx(2), F.dx(3), F.dx(4), F.dx(5)
    return 9 * f2 * f2 * f5 - 45 * f2 * f3 * f4 + 40 * f3 * f3 * f3


@lru_cache(maxsize=None)
def cartan_tube_polynomial() -> DiffRational:
    """Tube sphericity invariant as ``num / F_xx**m``, derived symbolically.

    On a tube ``u = F(x)`` both ``(1,0)`` and ``(0,1)`` fields act as
    ``d/dx / 2`` and ``P = F_xxx / (2 F_xx)``; feeding these into the general
    formula gives a rational function of ``F_xx ... F_xxxxxx``.
    """
    alg = DiffAlgebra(1, (2,))
    half = Fraction(1, 2)
    P = alg.sym((3,)) / alg.sym((2,)) * half

    def L(f):
        return f.derive(0) * half

    return formulas.cartan_expression(L, L, P)


def _eval_1d(expr: DiffRational, F: GraphSurface) -> Jet:
    syms = {s for m in expr.num.terms for s, _ in m} | {expr.alg.den}
    need = max(s[0] for s in syms)
    _need(F, need)
    values = {s: F.dx(s[0]).truncate(F.order - need) for s in syms}
    one = F.jet.space.const(1, F.order - need)
    return expr.evaluate(values, one)


def cartan_tube(F) -> Jet:
    """Sphericity invariant of the tube over a curve, from the cached derived polynomial."""
    F = as_graph(F)
    _need(F, 6, dim=1)
    _need_fxx(F)
    return _eval_1d(cartan_tube_polynomial(), F)


def cartan_tube_long_raw(F) -> Jet:
    """Long polynomial form with two 5th-order factors; not weight-consistent, kept for comparison."""
    F = as_graph(F)
    _need(F, 5, dim=1)
    f2, f3, f4, f5 = F.dx(2), F.dx(3), F.dx(4), F.dx(5)
    return (f2**3 * f5 - 7 * f2**2 * f3 * f4 - 4 * f2**2 * f4**2 + 25 * f2 * f3**2 * f4 - 15 * f3**3) * Fraction(1, 16)


def cartan_tube_long(F) -> Jet:
    """Explicit 6th order polynomial form, ``num / (16 F_xx**4)``; a cross-check of :func:`cartan_tube`."""
    F = as_graph(F)
    _need(F, 6, dim=1)
    _need_fxx(F)
    f2, f3, f4, f5, f6 = F.dx(2), F.dx(3), F.dx(4), F.dx(5), F.dx(6)
    num = f2**3 * f6 - 7 * f2**2 * f3 * f5 - 4 * f2**2 * f4**2 + 25 * f2 * f3**2 * f4 - 15 * f3**4
    return num / (16 * f2**4)


# --------------------------------------------------------------------------
# surfaces


def s_aff_numerator(F) -> Jet:
    """``F_xx F_xxy - F_xy F_xxx``."""
    F = as_graph(F)
    _need(F, 3, dim=2)
    return F.d(2, 0) * F.d(2, 1) - F.d(1, 1) * F.d(3, 0)


def s_aff(F) -> Jet:
    F = as_graph(F)
    _need(F, 3, dim=2)
    _need_fxx(F)
    fxx = F.d(2, 0)
    return s_aff_numerator(F) / (fxx * fxx)


def w_aff_numerator(F) -> Jet:
    """``F_xx**2 F_xxxy - F_xx F_xy F_xxxx + 2 F_xy F_xxx**2 - 2 F_xx F_xxx F_xxy``."""
    F = as_graph(F)
    _need(F, 4, dim=2)
    fxx, fxy, fxxx, fxxy = F.d(2, 0), F.d(1, 1), F.d(3, 0), F.d(2, 1)
    fxxxx, fxxxy = F.d(4, 0), F.d(3, 1)
    return fxx * fxx * fxxxy - fxx * fxy * fxxxx + 2 * fxy * fxxx * fxxx - 2 * fxx * fxxx * fxxy


def w_aff(F) -> Jet:
    """First invariant of a rank-one surface, ``W_num / (F_xx * S_num)``.

    This is the value of the first tube-restricted CR invariant once the
    vanishing Hessian has been used to eliminate the ``y``-derivatives.
    """
    F = as_graph(F)
    _need(F, 4, dim=2)
    _need_fxx(F)
    _need_snum(F)
    return w_aff_numerator(F) / (F.d(2, 0) * s_aff_numerator(F))


def w_aff_squared_quotient(F) -> Jet:
    """``W_num / (F_xx * S_num**2)``, which differs from :func:`w_aff` by the relative invariant ``S_num``."""
    F = as_graph(F)
    _need(F, 4, dim=2)
    _need_fxx(F)
    _need_snum(F)
    s = s_aff_numerator(F)
    return w_aff_numerator(F) / (F.d(2, 0) * s * s)


@dataclass(frozen=True)
class TubeFields:
    """Real fields through which the complex frame of a tube acts on functions of (x, y)."""

    F: GraphSurface

    @cached_property
    def k(self) -> Jet:
        return -self.F.d(1, 1) / self.F.d(2, 0)

    @cached_property
    def P(self) -> Jet:
        return self.F.d(3, 0) / (2 * self.F.d(2, 0))

    def L1(self, f: Jet) -> Jet:
        return f.diff(f.vars[0]) * Fraction(1, 2)

    def K(self, f: Jet) -> Jet:
        x, y = f.vars
        return self.k * f.diff(x) * Fraction(1, 2) + f.diff(y) * Fraction(1, 2)


def w_aff_from_fields(F) -> Jet:
    """First invariant evaluated through the real fields ``L1``, ``K`` (no Hessian elimination)."""
    F = as_graph(F)
    _need(F, 5, dim=2)
    _need_fxx(F)
    _need_snum(F)
    t = TubeFields(F)
    return formulas.w0_expression(t.K, t.L1, t.L1, t.k, t.k, 0)


def j_aff(F) -> Jet:
    """Second invariant of a rank-one surface from its derivation formula in ``L1``, ``k``, ``P``."""
    F = as_graph(F)
    _need(F, 6, dim=2)
    _need_fxx(F)
    _need_snum(F)
    t = TubeFields(F)
    return formulas.j0bar_expression(t.L1, t.k, t.P)


def j_tilde(F) -> Jet:
    """Closed form ``-(9 F_xx**2 F_xxxxx - 45 F_xx F_xxx F_xxxx + 40 F_xxx**3) / (432 F_xx**3)``."""
    F = as_graph(F)
    _need(F, 5, dim=2)
    _need_fxx(F)
    fxx = F.d(2, 0)
    return -monge(F) / (432 * fxx**3)


def j_tilde_from_fields(F) -> Jet:
    F = as_graph(F)
    _need(F, 5, dim=2)
    _need_fxx(F)
    t = TubeFields(F)
    return formulas.j_tilde_expression(t.L1, t.P)


# --------------------------------------------------------------------------
# rank-one constraint closure

_CLOSURE_NAMES = {
    (1, 2): "F_xyy", (0, 3): "F_yyy",
    (2, 2): "F_xxyy", (1, 3): "F_xyyy", (0, 4): "F_yyyy",
    (2, 3): "F_xxyyy", (1, 4): "F_xyyyy", (0, 5): "F_yyyyy",
}


def _closure_rule(alg: DiffAlgebra, alpha):
    a, b = alpha
    if b < 2:
        return None
    if (a, b) == (0, 2):
        fxy, fxx = alg.sym((1, 1)), alg.sym((2, 0))
        return fxy * fxy / fxx
    # differentiate a lower rule: in x when possible, otherwise in y
    if a >= 1:
        return alg.sym((a - 1, b)).derive(0)
    return alg.sym((0, b - 1)).derive(1)


@lru_cache(maxsize=None)
def closure_algebra() -> DiffAlgebra:
    """Differential algebra in which every ``F_{x^a y^b}`` with ``b >= 2`` is eliminated."""
    return DiffAlgebra(2, (2, 0), _closure_rule)


def closure_rule(alpha) -> DiffRational:
    return closure_algebra().sym(tuple(alpha))


def expanded_closure_rules() -> dict:
    """The first five replacement formulas written out as explicit rational expressions."""
    alg = closure_algebra()
    fxx, fxy, fxxx, fxxy, fxxxx, fxxxy = (
        DiffRational(alg, Poly.symbol(s)) for s in [(2, 0), (1, 1), (3, 0), (2, 1), (4, 0), (3, 1)]
    )
    return {
        (1, 2): 2 * fxy * fxxy / fxx - fxy**2 * fxxx / fxx**2,
        (0, 3): 3 * fxy**2 * fxxy / fxx**2 - 2 * fxy**3 * fxxx / fxx**3,
        (2, 2): 2 * fxxy**2 / fxx - 4 * fxy * fxxy * fxxx / fxx**2 + 2 * fxy * fxxxy / fxx
        + 2 * fxy**2 * fxxx**2 / fxx**3 - fxy**2 * fxxxx / fxx**2,
        (1, 3): 6 * fxy * fxxy**2 / fxx**2 - 12 * fxy**2 * fxxx * fxxy / fxx**3 + 3 * fxy**2 * fxxxy / fxx**2
        + 6 * fxy**3 * fxxx**2 / fxx**4 - 2 * fxy**3 * fxxxx / fxx**3,
        (0, 4): 12 * fxy**2 * fxxy**2 / fxx**3 - 24 * fxy**3 * fxxx * fxxy / fxx**4
        + 12 * fxy**4 * fxxx**2 / fxx**5 + 4 * fxy**3 * fxxxy / fxx**3 - 3 * fxy**4 * fxxxx / fxx**4,
    }


def _eval_2d(expr: DiffRational, F: GraphSurface) -> Jet:
    syms = {s for m in expr.num.terms for s, _ in m} | {expr.alg.den}
    need = max(sum(s) for s in syms)
    _need(F, need)
    values = {s: F.d(*s).truncate(F.order - need) for s in syms}
    one = F.jet.space.const(1, F.order - need)
    return expr.evaluate(values, one)


def constraint_closure(F, max_order: int = 5) -> dict[str, Jet]:
    """Mixed derivatives ``F_{x^a y^b}`` (``b >= 2``) predicted by the rank-one constraint.

    Each value is built from derivatives with at most one ``y``; comparing
    with direct differentiation tests the hypothesis.
    """
    F = as_graph(F)
    _need(F, 3, dim=2)
    _need_fxx(F)
    if not F.hessian_zero:
        raise PreconditionFailed("hessian == 0", "Hessian does not vanish identically to the jet order")
    out = {}
    for alpha, name in _CLOSURE_NAMES.items():
        if sum(alpha) <= min(max_order, F.order):
            out[name] = _eval_2d(closure_rule(alpha), F)
    return out


# --------------------------------------------------------------------------
# reports


@dataclass
class InvariantValue:
    name: str
    verdict: str
    order: int | None = None
    jet: Jet | None = None
    detail: str = ""

    def to_json_dict(self) -> dict:
        out = {"invariant": self.name, "verdict": self.verdict}
        if self.order is not None:
            out["order"] = self.order
        if self.jet is not None:
            out["value_coeffs"] = self.jet.to_json_dict()["coeffs"]
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class InvariantReport:
    tolerance: object
    backend: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> InvariantValue:
        return self.values[name]

    def verdicts(self) -> dict[str, str]:
        return {k: v.verdict for k, v in self.values.items()}

    def to_json_dict(self) -> dict:
        return {
            "backend": self.backend,
            "tolerance": str(self.tolerance),
            "invariants": [v.to_json_dict() for v in self.values.values()],
        }


def verdict(jet: Jet, tolerance=None) -> str:
    """``exact-zero`` only on the exact backend; otherwise compare to the tolerance."""
    if jet.backend.exact:
        return EXACT_ZERO if jet.is_zero() else NONZERO
    tol = DEFAULT_FLOAT_TOLERANCE if tolerance is None else tolerance
    return BELOW_TOLERANCE if jet.is_zero(tol) else NONZERO


CURVE_INVARIANTS: dict[str, Callable] = {
    "halphen": halphen,
    "monge": monge,
    "cartan_tube": cartan_tube,
}

SURFACE_INVARIANTS: dict[str, Callable] = {
    "hessian_det": hessian_det,
    "s_aff_numerator": s_aff_numerator,
    "s_aff": s_aff,
    "w_aff_numerator": w_aff_numerator,
    "w_aff": w_aff,
    "j_aff": j_aff,
    "j_tilde": j_tilde,
}


def invariant_report(F, names: Iterable[str] | None = None, tolerance=None) -> InvariantReport:
    F = as_graph(F)
    table = CURVE_INVARIANTS if F.dim == 1 else SURFACE_INVARIANTS
    if names is None:
        names = list(table)
    be = F.backend
    tol = 0 if be.exact else (DEFAULT_FLOAT_TOLERANCE if tolerance is None else tolerance)
    report = InvariantReport(tolerance=tol, backend=be.name)
    for name in names:
        fn = table.get(name)
        if fn is None:
            raise KeyError(f"unknown invariant {name!r} for a {F.dim}-variable graph")
        try:
            value = fn(F)
        except (PreconditionFailed, OrderTooLow) as exc:
            hyp = getattr(exc, "hypothesis", "order")
            report.values[name] = InvariantValue(name, PRECONDITION_FAILED, detail=f"{hyp}: {exc}")
            continue
        report.values[name] = InvariantValue(name, verdict(value, tol), value.order, value)
    return report
