from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, strategies as st

from _support import XY, X, random_jet, random_rank_one
from tubeinv import GraphConditionError, PreconditionFailed
from tubeinv import affine_invariants as ai
from tubeinv.expr import eval_jet
from tubeinv.transform import (
    CURVE_LAWS, SURFACE_LAWS, AffineMap, _source_rows, applicable_laws, factors, pullback,
    random_near_identity, transform_graph, verify_law,
)

I3 = AffineMap.identity(3)


def lc(order):
    return eval_jet("x^2/(1-y)", XY, order)


def test_map_algebra():
    g = AffineMap(((2, 1, 0), (0, 1, 0), (1, 0, 3)), (1, -1, 0))
    assert g.delta == 6
    assert g.compose(g.inverse()).is_identity()
    assert g.inverse().compose(g).is_identity()
    assert g.apply((0, 0, 0)) == (1, -1, 0)
    assert g.inverse().apply(g.apply((1, 2, 3))) == (1, 2, 3)
    assert (g.entry("a"), g.entry("b"), g.entry("m"), g.entry("r")) == (2, 1, 0, 3)


def test_singular_maps_are_rejected():
    with pytest.raises(PreconditionFailed):
        AffineMap(((1, 2, 0), (2, 4, 0), (0, 0, 1)), (0, 0, 0))
    with pytest.raises(ValueError):
        AffineMap(((1, 0), (0, 1), (0, 0)), (0, 0))


def test_map_json_round_trip():
    g = random_near_identity(random.Random(4), 3)
    assert AffineMap.from_json_dict(json.loads(json.dumps(g.to_json_dict()))) == g


@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_random_maps_stay_near_identity(seed, size):
    g = random_near_identity(random.Random(seed), size)
    assert g.near_identity()
    assert g.delta != 0


def test_simple_maps_by_hand():
    F = random_jet(random.Random(1), XY, 5)
    # u' = 2u + x: the new graph is 2F + x at the same base
    g = AffineMap(((1, 0, 0), (0, 1, 0), (1, 0, 2)), (0, 0, 0))
    assert transform_graph(g, F) == 2 * F + XY.var("x", 5)
    # swapping x and y swaps the arguments
    sw = AffineMap(((0, 1, 0), (1, 0, 0), (0, 0, 1)), (0, 0, 0))
    Fs = transform_graph(sw, F)
    for (i, j) in [(1, 0), (2, 1), (3, 2), (0, 5)]:
        assert Fs.coeff((j, i)) == F.coeff((i, j))


def test_translation_moves_the_base_point():
    F = random_jet(random.Random(2), XY, 4)
    g = AffineMap(I3.matrix, (1, 2, 3))
    Fp = transform_graph(g, F)
    assert tuple(Fp.base) == (1, 2)
    assert Fp.constant == F.constant + 3
    assert [Fp.coeff(a) for a in [(1, 0), (1, 1)]] == [F.coeff(a) for a in [(1, 0), (1, 1)]]


@pytest.mark.parametrize("seed", range(5))
def test_image_satisfies_the_graph_condition(seed):
    rng = random.Random(seed)
    F = random_jet(rng, XY, 5)
    g = random_near_identity(rng, 3)
    Fp = transform_graph(g, F)
    # F'(A, B) = C on the source graph, checked by direct composition
    assert pullback(Fp, g, F) == _source_rows(g, F)[2]
    assert transform_graph(g.inverse(), Fp) == F


def test_identity_and_composition():
    rng = random.Random(9)
    F = random_jet(rng, XY, 5)
    assert transform_graph(I3, F) == F
    g, h = random_near_identity(rng, 3), random_near_identity(rng, 3)
    assert transform_graph(h, transform_graph(g, F)) == transform_graph(h.compose(g), F)


def test_vertical_tangent_is_a_graph_condition_error():
    F = eval_jet("x^2", X, 4)
    # x' = u, u' = x turns the parabola sideways at the origin
    g = AffineMap(((0, 1), (1, 0)), (0, 0))
    with pytest.raises(GraphConditionError):
        transform_graph(g, F)


def test_factors_at_the_identity():
    fa = factors(I3, lc(6))
    assert fa.Lambda == XY.const(1, 5)
    assert fa.mu.constant == 1 and fa.delta == 1
    assert fa.Upsilon == ai.as_graph(lc(6)).d(2, 0).truncate(fa.Upsilon.order)


@pytest.mark.parametrize("law", sorted(SURFACE_LAWS))
def test_surface_laws_on_the_model(law):
    rng = random.Random(sorted(SURFACE_LAWS).index(law))
    for _ in range(3):
        check = verify_law(law, random_near_identity(rng, 3), lc(6))
        assert check.ok, law


@pytest.mark.parametrize("seed", range(3))
def test_surface_laws_on_rank_one_jets(seed):
    rng = random.Random(50 + seed)
    F = random_rank_one(rng, 6)
    g = random_near_identity(rng, 3)
    assert applicable_laws(F) == sorted(SURFACE_LAWS)
    for law in SURFACE_LAWS:
        assert verify_law(law, g, F).ok, law


def test_general_laws_on_a_generic_jet():
    rng = random.Random(21)
    F = random_jet(rng, XY, 5, {(2, 0): 1, (0, 2): 1})
    laws = applicable_laws(F)
    assert laws == ["contact_form", "hessian", "hessian_matrix"]
    g = random_near_identity(rng, 3)
    for law in laws:
        assert verify_law(law, g, F).ok, law
    with pytest.raises(PreconditionFailed):
        verify_law("fxx", g, F)


@pytest.mark.parametrize("expr", ["exp(x)", "x^2/(1-x)", "x^2+x^5"])
def test_curve_laws(expr):
    rng = random.Random(7)
    F = eval_jet(expr, X, 7)
    for _ in range(3):
        g = random_near_identity(rng, 2)
        for law in CURVE_LAWS:
            assert verify_law(law, g, F).ok, law


def test_laws_check_the_dimension():
    with pytest.raises(PreconditionFailed):
        verify_law("halphen", I3, lc(6))
    with pytest.raises(KeyError):
        verify_law("nope", I3, lc(6))


def test_monge_is_not_invariant_so_the_factor_matters():
    F = eval_jet("exp(x)", X, 6)
    g = AffineMap(((1, 0), (1, 2)), (0, 0))
    assert ai.monge(transform_graph(g, F)).constant != ai.monge(F).constant
    assert verify_law("monge", g, F).ok
