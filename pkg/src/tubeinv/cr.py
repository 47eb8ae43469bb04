"""CR frames, Levi data and the primary CR invariants of graphed hypersurfaces.

A hypersurface ``u = F(...)`` is described by a real jet of ``F`` together
with a role map from the intrinsic real coordinates (``x, y, v`` in C^2 or
``x1, y1, x2, y2, v`` in C^3) to jet variables.  A role absent from the map
means ``F`` does not depend on that coordinate, so tubes are handled by the
general formulas without carrying dummy variables.

Working values are complex jets; ``d/dz_k = (d/dx_k - i d/dy_k) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import formulas
from .affine_invariants import det
from .cjet import CJet
from .errors import OrderTooLow, PreconditionFailed
from .jet import Jet

C2_ROLES = ("x", "y", "v")
C3_ROLES = ("x1", "y1", "x2", "y2", "v")
_HALF = Fraction(1, 2)


class CRGraph:
    def __init__(self, jet: Jet, roles: Mapping[str, str] | None = None, kind: str | None = None):
        if roles is None:
            roles = {v: v for v in jet.vars}
        roles = dict(roles)
        for r, v in roles.items():
            if v not in jet.vars:
                raise ValueError(f"role {r!r} points to unknown variable {v!r}")
        unused = set(jet.vars) - set(roles.values())
        if unused:
            raise ValueError(f"jet variables {sorted(unused)} have no role")
        if kind is None:
            if set(roles) <= set(C2_ROLES):
                kind = "c2"
            elif set(roles) <= set(C3_ROLES):
                kind = "c3"
            else:
                raise ValueError(f"roles {sorted(roles)} fit neither C^2 nor C^3 graphs")
        allowed = C2_ROLES if kind == "c2" else C3_ROLES
        if not set(roles) <= set(allowed):
            raise ValueError(f"roles {sorted(roles)} are not valid for kind {kind}")
        self.jet = jet
        self.roles = roles
        self.kind = kind
        self.F = CJet(jet)

    @classmethod
    def tube(cls, jet: Jet) -> CRGraph:
        """Tube over ``u = F(x)`` (in C^2) or ``u = F(x, y)`` (in C^3)."""
        if jet.space.n == 1:
            return cls(jet, {"x": jet.vars[0]}, "c2")
        if jet.space.n == 2:
            return cls(jet, {"x1": jet.vars[0], "x2": jet.vars[1]}, "c3")
        raise ValueError("tubes have one or two base variables")

    @property
    def order(self) -> int:
        return self.jet.order

    @property
    def space(self):
        return self.jet.space

    def const(self, re, im=0) -> CJet:
        return CJet.const(self.space, re, im, self.order)

    # fields with constant coefficients
    def d_z(self, k: str = "") -> Derivation:
        return Derivation(self, {f"x{k}": self.const(_HALF), f"y{k}": self.const(0, -_HALF)})

    def d_zbar(self, k: str = "") -> Derivation:
        return Derivation(self, {f"x{k}": self.const(_HALF), f"y{k}": self.const(0, _HALF)})

    def d_v(self) -> Derivation:
        return Derivation(self, {"v": self.const(1)})


class Derivation:
    """A vector field ``sum c_r d/dr`` over intrinsic coordinates, with complex jet coefficients."""

    __slots__ = ("graph", "coeffs")

    def __init__(self, graph: CRGraph, coeffs: Mapping[str, CJet]):
        self.graph = graph
        self.coeffs = dict(coeffs)

    def __call__(self, f: CJet) -> CJet:
        return self.apply(f)

    def apply(self, f):
        if isinstance(f, Jet):
            f = CJet(f)
        if f.order < 1:
            raise OrderTooLow("cannot differentiate an order 0 jet")
        out = None
        for role, c in self.coeffs.items():
            var = self.graph.roles.get(role)
            if var is None:
                continue
            term = c * f.diff(var)
            out = term if out is None else out + term
        if out is None:
            return CJet(f.space.zero(f.order - 1))
        return out

    def conj(self) -> Derivation:
        return Derivation(self.graph, {r: c.conj() for r, c in self.coeffs.items()})

    def __add__(self, other: Derivation) -> Derivation:
        out = dict(self.coeffs)
        for r, c in other.coeffs.items():
            out[r] = out[r] + c if r in out else c
        return Derivation(self.graph, out)

    def scale(self, f) -> Derivation:
        return Derivation(self.graph, {r: c * f for r, c in self.coeffs.items()})

    def commutator(self, other: Derivation) -> Derivation:
        """``[self, other]``; coefficient jets lose one order."""
        roles = set(self.coeffs) | set(other.coeffs)
        out = {}
        for r in sorted(roles):
            a = other.apply(self.coeffs[r]) if r in self.coeffs else None
            b = self.apply(other.coeffs[r]) if r in other.coeffs else None
            if a is None:
                out[r] = b
            elif b is None:
                out[r] = -a
            else:
                out[r] = b - a
        return Derivation(self.graph, out)

    def times_i(self) -> Derivation:
        return Derivation(self.graph, {r: c.times_i() for r, c in self.coeffs.items()})

    def coefficient(self, role: str) -> CJet | None:
        return self.coeffs.get(role)


def _nonzero_at_base(f: CJet) -> bool:
    be = f.backend
    re, im = f.constant
    if be.exact:
        return re != 0 or im != 0
    scale = f.max_abs()
    return not (be.is_zero(re, scale) and be.is_zero(im, scale))


def _A(G: CRGraph, k: str) -> CJet:
    Fz = G.d_z(k).apply(G.F)
    Fv = G.d_v().apply(G.F)
    den = CJet(Fv.re.space.const(1, Fv.order), Fv.re)  # 1 + i F_v, with F_v real
    return -(Fz.times_i() / den)


def rho0(G: CRGraph, X: Derivation, A: Mapping[str, CJet]) -> CJet:
    """``dv - sum_k (A^k dz_k + conj(A^k) dzbar_k)`` evaluated on ``X``."""
    comp = X.coefficient
    out = comp("v")
    if out is None:
        out = CJet(G.space.zero(G.order))
    for k, Ak in A.items():
        cx, cy = comp(f"x{k}"), comp(f"y{k}")
        if cx is None and cy is None:
            continue
        cx = cx if cx is not None else CJet(G.space.zero(G.order))
        cy = cy if cy is not None else CJet(G.space.zero(G.order))
        dz = cx + cy.times_i()
        dzb = cx - cy.times_i()
        out = out - Ak * dz - Ak.conj() * dzb
    return out


@dataclass
class FrameC2:
    A: CJet
    L: Derivation
    Lb: Derivation
    l: CJet
    P: CJet


def cr_frame_c2(G: CRGraph) -> FrameC2:
    if G.kind != "c2":
        raise ValueError("cr_frame_c2 needs a graph in C^2")
    if G.order < 3:
        raise OrderTooLow("the C^2 frame needs order >= 3")
    A = _A(G, "")
    L = G.d_z() + G.d_v().scale(A)
    Lb = L.conj()
    Ab = A.conj()
    dz, dzb, dv = G.d_z(), G.d_zbar(), G.d_v()
    l = (dz(Ab) + A * dv(Ab) - dzb(A) - Ab * dv(A)).times_i()
    if not _nonzero_at_base(l):
        raise PreconditionFailed("Levi nondegenerate", "the Levi factor l vanishes at the base point")
    P = (dz(l) + A * dv(l) - l * dv(A)) / l
    return FrameC2(A, L, Lb, l, P)


def cartan_general(G: CRGraph) -> CJet:
    """Sphericity invariant by nested application of the frame fields."""
    if G.order < 6:
        raise OrderTooLow("the sphericity invariant needs order >= 6")
    fr = cr_frame_c2(G)
    return formulas.cartan_expression(fr.L.apply, fr.Lb.apply, fr.P.conj())


@dataclass
class FrameC3:
    A1: CJet
    A2: CJet
    L1: Derivation
    L2: Derivation
    Lb1: Derivation
    l: CJet
    k: CJet
    K: Derivation
    T: Derivation
    P: CJet
    levi_matrix: list
    levi_det: CJet
    Lb1_k: CJet


def _levi_matrix(G: CRGraph, L1, L2, A):
    Lb1, Lb2 = L1.conj(), L2.conj()
    Ls, Lbs = (L1, L2), (Lb1, Lb2)
    return [[rho0(G, Ls[j].commutator(Lbs[i]).times_i(), A) for j in range(2)] for i in range(2)]


def cr_frame_c3(G: CRGraph, check: bool = True) -> FrameC3:
    if G.kind != "c3":
        raise ValueError("cr_frame_c3 needs a graph in C^3")
    if G.order < 4:
        raise OrderTooLow("the C^3 frame needs order >= 4")
    A1, A2 = _A(G, "1"), _A(G, "2")
    dv = G.d_v()
    L1 = G.d_z("1") + dv.scale(A1)
    L2 = G.d_z("2") + dv.scale(A2)
    Lb1 = L1.conj()
    A = {"1": A1, "2": A2}
    mat = _levi_matrix(G, L1, L2, A)
    ldet = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    if check and not ldet.is_zero():
        raise PreconditionFailed("Levi rank <= 1", "Levi determinant does not vanish identically (Levi nondegenerate)")
    A1b = A1.conj()
    den = L1(A1b) - Lb1(A1)
    l = den.times_i()
    if check and not _nonzero_at_base(l):
        raise PreconditionFailed("Levi rank 1", "l vanishes at the base point (Levi rank 0)")
    k = -(L2(A1b) - Lb1(A2)) / den
    K = L1.scale(k) + L2
    T = L1.commutator(Lb1).times_i()
    dz1 = G.d_z("1")
    P = (dz1(l) + A1 * dv(l) - l * dv(A1)) / l
    s = Lb1(k)
    if check and not _nonzero_at_base(s):
        raise PreconditionFailed("2-nondegenerate", "Lb1(k) vanishes at the base point")
    return FrameC3(A1, A2, L1, L2, Lb1, l, k, K, T, P, mat, ldet, s)


def w0(G: CRGraph) -> CJet:
    """First primary invariant; needs order >= 5."""
    if G.order < 5:
        raise OrderTooLow("W0 needs order >= 5")
    fr = cr_frame_c3(G)
    i_Tk = fr.T(fr.k).times_i()
    return formulas.w0_expression(fr.K.apply, fr.L1.apply, fr.Lb1.apply, fr.k, fr.k.conj(), i_Tk)


def j0(G: CRGraph) -> CJet:
    """Second primary invariant, the conjugate of the ``Lb1``-form; needs order >= 6."""
    if G.order < 6:
        raise OrderTooLow("J0 needs order >= 6")
    fr = cr_frame_c3(G)
    return formulas.j0bar_expression(fr.Lb1.apply, fr.k, fr.P.conj()).conj()


def levi_form_det(G: CRGraph) -> CJet:
    """Bordered complex Levi determinant of ``rho = F - u``."""
    if G.order < 3:
        raise OrderTooLow("Levi determinant needs order >= 3")
    ks = [""] if G.kind == "c2" else ["1", "2"]
    dz = [G.d_z(k) for k in ks]
    dzb = [G.d_zbar(k) for k in ks]
    # d/dw = (d/du - i d/dv)/2 and rho_u = -1
    dw = Derivation(G, {"v": G.const(0, -_HALF)})
    dwb = dw.conj()
    first = [d(G.F) for d in dz] + [dw(G.F) - _HALF]
    firstb = [d(G.F) for d in dzb] + [dwb(G.F) - _HALF]
    Ds = dzb + [dwb]
    n = len(first)
    rows = [[0] + [f.truncate(G.order - 2) for f in first]]
    for j in range(n):
        rows.append([firstb[j].truncate(G.order - 2)] + [Ds[j](first[i]) for i in range(n)])
    return det(rows)


@dataclass
class LeviChecks:
    levi_det: CJet
    levi_rank_at_base: int
    rank1_det: CJet | None
    two_nondeg: bool | None

    def to_json_dict(self) -> dict:
        return {
            "levi_det_at_base": [self.levi_det.backend.to_str(c) for c in self.levi_det.constant],
            "levi_rank_at_base": self.levi_rank_at_base,
            "rank1_det_zero": None if self.rank1_det is None else self.rank1_det.is_zero(),
            "two_nondegenerate": self.two_nondeg,
        }


def _rank2(mat) -> int:
    vals = [[_nonzero_at_base(e) for e in row] for row in mat]
    if not any(any(r) for r in vals):
        return 0
    d = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    return 2 if _nonzero_at_base(d) else 1


def levi_checks(G: CRGraph) -> LeviChecks:
    ldet = levi_form_det(G)
    if G.kind == "c2":
        fr_l = None
        try:
            fr_l = cr_frame_c2(G).l
        except PreconditionFailed:
            pass
        return LeviChecks(ldet, 1 if fr_l is not None else 0, None, None)
    fr = cr_frame_c3(G, check=False)
    rank = _rank2(fr.levi_matrix)
    two = None
    if rank == 1 and fr.levi_det.is_zero():
        two = _nonzero_at_base(fr.Lb1_k)
    return LeviChecks(ldet, rank, fr.levi_det, two)
