from __future__ import annotations

import json
from fractions import Fraction
from itertools import product

import mpmath
import pytest
from hypothesis import given, strategies as st

from _support import XY, X, jets
from tubeinv import (
    DomainError,
    NeedsFloatBackend,
    NonUnitDivisor,
    OrderTooLow,
    PreconditionFailed,
    VariableMismatch,
)
from tubeinv.jet import Jet, JetSpace, analytic_lift, compose, implicit_solve, jet_diff, monomials
from tubeinv.scalars import EXACT, FloatBackend


def poly(space, terms, order):
    return space.from_dict(terms, order)


def test_storage_puts_same_degree_in_descending_lex():
    assert monomials(2, 2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def test_add_cancellation_and_identity():
    a = poly(X, {(0,): 1, (1,): 1}, 3)
    b = poly(X, {(0,): 1, (1,): -1}, 3)
    assert a + b == X.const(2, 3)
    assert a + X.zero(3) == a


def test_small_products():
    a = poly(X, {(0,): 1, (1,): 1}, 2)
    b = poly(X, {(0,): 1, (1,): -1}, 2)
    assert a * b == poly(X, {(0,): 1, (2,): -1}, 2)
    x = X.var("x", 3)
    assert x * x == poly(X, {(2,): 1}, 3)


def test_geometric_series_division():
    y = XY.var("y", 4)
    g = 1 / (1 - y)
    assert g == poly(XY, {(0, k): 1 for k in range(5)}, 4)


def test_result_order_is_the_minimum():
    a = XY.var("x", 5)
    b = XY.var("y", 3)
    assert (a + b).order == 3
    assert (a * b).order == 3


def test_mismatched_spaces_are_rejected():
    other = JetSpace(("x", "z"), (0, 0), EXACT)
    with pytest.raises(VariableMismatch):
        XY.var("x", 2) + other.var("x", 2)


def test_non_unit_division():
    with pytest.raises(NonUnitDivisor):
        XY.const(1, 3) / XY.var("x", 3)


def test_diff_basics():
    assert XY.const(7, 3).diff("y").is_zero()
    x2 = poly(X, {(2,): 1}, 4)
    assert x2.diff("x") == poly(X, {(1,): 2}, 3)
    with pytest.raises(VariableMismatch):
        x2.diff("q")
    with pytest.raises(OrderTooLow):
        X.const(1, 0).diff("x")


@given(jets(), jets())
def test_addition_matches_coefficient_tables(a, b):
    s = a + b
    for alpha in monomials(2, 4):
        assert s.coeff(alpha) == a.coeff(alpha) + b.coeff(alpha)


@given(jets(order=3), jets(order=3))
def test_product_matches_brute_force_convolution(a, b):
    p = a * b
    for alpha in monomials(2, 3):
        expected = 0
        for i, j in product(range(alpha[0] + 1), range(alpha[1] + 1)):
            expected += a.coeff((i, j)) * b.coeff((alpha[0] - i, alpha[1] - j))
        assert p.coeff(alpha) == expected


@given(jets(), jets(), jets())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a * XY.const(1, 4) == a


@given(jets(), jets(unit=True))
def test_division_multiplies_back(a, b):
    assert (a / b) * b == a
    assert b / b == XY.const(1, 4)


@given(jets(order=5), jets(order=5))
def test_leibniz_and_schwarz(a, b):
    assert (a * b).diff("x") == a.diff("x") * b.truncate(4) + a.truncate(4) * b.diff("x")
    assert a.diff("x").diff("y") == a.diff("y").diff("x")
    assert jet_diff(a, "y") == a.diff("y")


@given(jets(order=6), jets(order=6, unit=True))
def test_truncation_coherence(a, b):
    assert (a * b).truncate(3) == a.truncate(3) * b.truncate(3)
    assert (a / b).truncate(3) == a.truncate(3) / b.truncate(3)


@given(st.integers(-4, 4), jets(order=4, unit=True))
def test_integer_powers(n, a):
    expected = XY.const(1, 4)
    for _ in range(abs(n)):
        expected = expected * a
    if n < 0:
        expected = 1 / expected
    assert a**n == expected


def test_elementary_series_exact():
    x = X.var("x", 3)
    assert analytic_lift("exp", x) == poly(X, {(0,): 1, (1,): 1, (2,): Fraction(1, 2), (3,): Fraction(1, 6)}, 3)
    assert analytic_lift("log", 1 + x) == poly(X, {(1,): 1, (2,): Fraction(-1, 2), (3,): Fraction(1, 3)}, 3)
    assert analytic_lift("pow_int", 1 + x, 3) == (1 + x) * (1 + x) * (1 + x)


def test_exact_backend_refuses_irrational_values():
    x = X.var("x", 3)
    with pytest.raises(NeedsFloatBackend):
        analytic_lift("exp", x + 1)
    with pytest.raises(DomainError):
        analytic_lift("log", x - 1)


@pytest.mark.parametrize("fn", ["exp", "log", "sin", "cos", "arcsin", "arcsinh", "sqrt"])
def test_float_series_match_mpmath_derivatives(fn):
    be = FloatBackend(256)
    a0 = "1/3"
    space = JetSpace(("x",), (a0,), be)
    jet = analytic_lift(fn, space.var("x", 8))
    f = {"exp": mpmath.exp, "log": mpmath.log, "sin": mpmath.sin, "cos": mpmath.cos,
         "arcsin": mpmath.asin, "arcsinh": mpmath.asinh, "sqrt": mpmath.sqrt}[fn]
    with mpmath.workprec(300):
        for k in range(9):
            d = mpmath.diff(f, mpmath.mpf(1) / 3, k) / mpmath.factorial(k)
            assert abs(jet.coeff((k,)) - d) < mpmath.mpf(10) ** -60


def test_arcsin_exp_chain_rule_at_minus_one():
    be = FloatBackend(256)
    space = JetSpace(("x",), ("-1",), be)
    x = space.var("x", 8)
    F = analytic_lift("arcsin", analytic_lift("exp", x))
    # d/dx arcsin(e^x) = e^x / sqrt(1 - e^(2x))
    e = analytic_lift("exp", x)
    rhs = e / analytic_lift("sqrt", 1 - e * e)
    assert (F.diff("x") - rhs.truncate(7)).is_zero(mpmath.mpf(10) ** -50)


def test_compose_identity_and_shift():
    a = poly(XY, {(0, 0): 2, (1, 1): 3, (2, 0): -1}, 4)
    assert compose(a, {"x": XY.var("x", 4), "y": XY.var("y", 4)}) == a
    with pytest.raises(PreconditionFailed):
        compose(a, {"x": XY.var("x", 4) + 1, "y": XY.var("y", 4)})


@given(jets(order=4), jets(order=4), jets(order=4))
def test_compose_agrees_with_ring_operations(a, s, t):
    s = s - s.constant
    t = t - t.constant
    lhs = compose(a * a + a, {"x": s, "y": t})
    b = compose(a, {"x": s, "y": t})
    assert lhs == b * b + b


def test_implicit_solve_models():
    U = JetSpace(("x", "u"), (0, 0), EXACT)
    x, u = U.var("x", 5), U.var("u", 5)
    assert implicit_solve(u - x * x, "u") == poly(X, {(2,): 1}, 5)
    S = JetSpace(("x", "y", "u"), (0, 0, 0), EXACT)
    x, y, u = (S.var(v, 6) for v in ("x", "y", "u"))
    sol = implicit_solve(u * (1 - y) - x * x, "u")
    assert sol * (1 - XY.var("y", 6)) == poly(XY, {(2, 0): 1}, 6)


@given(jets(space=JetSpace(("x", "y", "u"), (0, 0, 0), EXACT), order=4))
def test_implicit_solve_residual_vanishes(G):
    G = G - G.constant + G.space.var("u", 4) * (1 - G.coeff((0, 0, 1)))
    u = implicit_solve(G, "u")
    back = compose(G, {"x": XY.var("x", 4), "y": XY.var("y", 4), "u": u})
    assert back.is_zero()


def test_implicit_solve_preconditions():
    S = JetSpace(("x", "u"), (0, 0), EXACT)
    x, u = S.var("x", 3), S.var("u", 3)
    with pytest.raises(PreconditionFailed):
        implicit_solve(u - x + 1, "u")
    with pytest.raises(PreconditionFailed):
        implicit_solve(u * u - x, "u")


@given(jets(order=3))
def test_json_round_trip(a):
    data = json.loads(json.dumps(a.to_json_dict()))
    assert Jet.from_json_dict(data) == a


def test_float_json_round_trip_keeps_precision():
    be = FloatBackend(192)
    space = JetSpace(("x",), ("1/2",), be)
    a = analytic_lift("exp", space.var("x", 4))
    back = Jet.from_json_dict(json.loads(json.dumps(a.to_json_dict())))
    assert back.backend.precision == 192
    assert (back - a).is_zero(mpmath.mpf(10) ** -50)
