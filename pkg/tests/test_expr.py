from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from _support import XY, X
from tubeinv import ParseError, VariableMismatch
from tubeinv import affine_invariants as ai
from tubeinv.expr import (
    Add, Div, Func, Mul, Neg, Num, Pow, Sub, Var, default_vars, eval_jet, parse, to_text, variables,
)
from tubeinv.models import MODELS, get_model


def test_parse_model_texts():
    assert parse("x^2/(1-y)") == Div(Pow(Var("x"), 2), Sub(Num("1"), Var("y")))
    assert parse("arcsin(exp(x))") == Func("arcsin", Func("exp", Var("x")))
    assert parse("asinh(x)") == Func("arcsinh", Var("x"))
    assert parse("x**3") == Pow(Var("x"), 3)


def test_precedence_and_association():
    assert parse("-x^2") == Neg(Pow(Var("x"), 2))
    assert parse("a-b-c") == Sub(Sub(Var("a"), Var("b")), Var("c"))
    assert parse("a/b*c") == Mul(Div(Var("a"), Var("b")), Var("c"))
    assert parse("x^(-2)") == Pow(Var("x"), -2)
    assert parse("x^-2") == Pow(Var("x"), -2)


@pytest.mark.parametrize(
    "text, offset",
    [("x+*y", 2), ("(x", 2), ("foo(x)", 0), ("x^y", 2), ("x^2^3", 3), ("2 $ x", 2)],
)
def test_syntax_errors_carry_offsets(text, offset):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.offset == offset
    assert f"offset {offset}" in str(err.value)


names = st.sampled_from(["x", "y", "x1"])
leaves = st.one_of(names.map(Var), st.integers(0, 20).map(lambda n: Num(str(n))))
exprs = st.recursive(
    leaves,
    lambda inner: st.one_of(
        inner.map(Neg),
        st.tuples(inner, inner).map(lambda p: Add(*p)),
        st.tuples(inner, inner).map(lambda p: Sub(*p)),
        st.tuples(inner, inner).map(lambda p: Mul(*p)),
        st.tuples(inner, inner).map(lambda p: Div(*p)),
        st.tuples(inner, st.integers(-3, 4)).map(lambda p: Pow(*p)),
        st.tuples(st.sampled_from(["exp", "sin", "log"]), inner).map(lambda p: Func(*p)),
    ),
    max_leaves=8,
)


@given(exprs)
def test_print_parse_round_trip(e):
    assert parse(to_text(e)) == e


@given(exprs)
def test_variables_are_found(e):
    assert set(default_vars(e)) == set(variables(e))


def test_eval_small_models():
    assert eval_jet("x^2", X, 4) == X.from_dict({(2,): 1}, 4)
    assert eval_jet("x^2/(1-y)", XY, 3) == XY.from_dict({(2, 0): 1, (2, 1): 1}, 3)
    e = eval_jet("exp(x)", X, 5)
    fact = [1, 1, 2, 6, 24, 120]
    assert all(e.coeff((k,)) == Fraction(1, fact[k]) for k in range(6))


def test_eval_is_compositional():
    a = eval_jet("sin(x*y)+exp(x)", XY, 5)
    b = eval_jet("sin(x*y)", XY, 5) + eval_jet("exp(x)", XY, 5)
    assert a == b


def test_eval_rejects_unknown_variables():
    with pytest.raises(VariableMismatch):
        eval_jet("x+z", XY, 2)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_every_model_evaluates_at_its_base(name):
    m = get_model(name)
    F = m.jet(6)
    assert F.order == 6
    assert F.space.n == m.dim


def _check_holds(F, check):
    name, op, want = check.partition("=")[0].rstrip("!"), "!=" if "!=" in check else "=", check.split("=", 1)[1]
    if name == "hessian_signature":
        n = F.space.n
        expected = (n, 0, 0) if want == "(n,0)" else (0, n, 0)
        return ai.hessian_signature(F) == expected
    fn = {**ai.CURVE_INVARIANTS, **ai.SURFACE_INVARIANTS}[name]
    zero = ai.verdict(fn(F)) != ai.NONZERO
    return zero if op == "=" else not zero


@pytest.mark.parametrize("name", sorted(MODELS))
def test_model_checks_hold(name):
    m = get_model(name)
    F = m.jet(8)
    for check in m.checks:
        assert _check_holds(F, check), check


def test_unknown_model():
    with pytest.raises(KeyError):
        get_model("nope")
