from __future__ import annotations

import random
from fractions import Fraction

import pytest

from _support import XY, X, random_jet, random_rank_one
from tubeinv import OrderTooLow, PreconditionFailed
from tubeinv import affine_invariants as ai
from tubeinv.cjet import CJet
from tubeinv.cr import CRGraph, cartan_general, cr_frame_c3, j0, levi_checks, levi_form_det, w0
from tubeinv.expr import eval_jet
from tubeinv.jet import JetSpace
from tubeinv.scalars import EXACT

XYV = JetSpace(("x", "y", "v"), (0, 0, 0), EXACT)


def same(a: CJet, b) -> bool:
    b = b if isinstance(b, CJet) else CJet(b)
    n = min(a.order, b.order)
    return a.truncate(n) == b.truncate(n)


def test_roles_are_validated():
    F = random_jet(random.Random(0), XY, 3)
    with pytest.raises(ValueError):
        CRGraph(F, {"x": "x"})  # y has no role
    with pytest.raises(ValueError):
        CRGraph(F, {"x": "x", "q": "y"})
    assert CRGraph(F).kind == "c2"
    assert CRGraph(F, {"x1": "x", "x2": "y"}).kind == "c3"


def test_heisenberg_sphere():
    F = eval_jet("x^2+y^2", XYV, 8)
    G = CRGraph(F)
    assert cartan_general(G).is_zero()
    # bordered determinant of rho = |z|^2 - u, worked by hand, is -1/4 everywhere
    assert levi_form_det(G) == G.const(Fraction(-1, 4)).truncate(6)


def test_v_dependence_keeps_the_levi_form():
    G = CRGraph(eval_jet("x^2+y^2+v^2", XYV, 7))
    assert levi_checks(G).levi_rank_at_base == 1
    assert cartan_general(G).order == 1


@pytest.mark.parametrize("expr", ["x^2", "exp(x)", "x^2/(1-x)", "x^2+x^5/7", "x^2+x^3-x^6"])
def test_general_formula_agrees_with_the_tube_reduction(expr):
    F = eval_jet(expr, X, 8)
    c = cartan_general(CRGraph.tube(F))
    assert c.im.is_zero()
    assert same(c, ai.cartan_tube(F))


def test_levi_degenerate_curve_tube_is_rejected():
    with pytest.raises(PreconditionFailed):
        cartan_general(CRGraph.tube(eval_jet("x^3", X, 8)))
    assert levi_checks(CRGraph.tube(eval_jet("x^3", X, 8))).levi_rank_at_base == 0


def test_lc_tube_invariants_vanish():
    G = CRGraph.tube(eval_jet("x^2/(1-y)", XY, 10))
    assert w0(G).is_zero()
    assert j0(G).is_zero()
    chk = levi_checks(G)
    assert (chk.levi_rank_at_base, chk.two_nondeg) == (1, True)
    assert chk.rank1_det.is_zero()


@pytest.mark.parametrize("seed", range(5))
def test_tube_invariants_equal_the_affine_ones(seed):
    F = random_rank_one(random.Random(seed), 7)
    G = CRGraph.tube(F)
    W = w0(G)
    assert W.im.is_zero()
    assert same(W, ai.w_aff(F))
    assert same(j0(G), ai.j_aff(F))


def test_c3_preconditions():
    with pytest.raises(PreconditionFailed, match="Levi rank <= 1"):
        cr_frame_c3(CRGraph.tube(eval_jet("x^2+y^2", XY, 6)))
    assert levi_checks(CRGraph.tube(eval_jet("x^2+y^2", XY, 6))).levi_rank_at_base == 2
    # depends on x1 only: Levi rank one but k is constant, so not 2-nondegenerate
    flat = CRGraph.tube(eval_jet("x^2", XY, 6))
    with pytest.raises(PreconditionFailed, match="2-nondegenerate"):
        cr_frame_c3(flat)
    assert levi_checks(flat).two_nondeg is False
    with pytest.raises(OrderTooLow):
        w0(CRGraph.tube(eval_jet("x^2/(1-y)", XY, 4)))


def test_derivation_algebra():
    G = CRGraph.tube(random_rank_one(random.Random(3), 6))
    fr = cr_frame_c3(G)
    a, b = fr.L1, fr.L2
    f = G.F
    assert same(a.commutator(b)(f), -(b.commutator(a)(f)))
    assert same(fr.Lb1(f), fr.L1(f).conj())
    # T = i [L1, Lb1] is a real field
    assert same(fr.T(f), fr.T(f).conj())
