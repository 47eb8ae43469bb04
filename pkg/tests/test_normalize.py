from __future__ import annotations

import random

import pytest

from _support import XY, random_rank_one
from tubeinv import PreconditionFailed, TubeInvError
from tubeinv.expr import eval_jet
from tubeinv.jet import JetSpace
from tubeinv.normalize import EQUIVALENT, OBSTRUCTION, model_jet, normalize_to_model
from tubeinv.pde import PDEInitialData, pde_propagate
from tubeinv.scalars import FloatBackend
from tubeinv.transform import AffineMap, random_near_identity, transform_graph

LC = "x^2/(1-y)"


def test_model_is_fixed_by_the_identity():
    res = normalize_to_model(eval_jet(LC, XY, 8))
    assert res.verdict == EQUIVALENT
    assert res.map.is_identity()
    assert res.jet == model_jet(XY, 8)
    assert [s["step"] for s in res.steps] == list(range(7))


@pytest.mark.parametrize("seed", range(5))
def test_images_of_the_model_come_back(seed):
    rng = random.Random(seed)
    g = random_near_identity(rng, 3)
    F = transform_graph(g, eval_jet(LC, XY, 8))
    res = normalize_to_model(F)
    assert res.ok
    # the returned map really carries F onto the model, and a second pass is trivial
    assert transform_graph(res.map, F) == model_jet(XY, 8)
    assert normalize_to_model(res.jet).map.is_identity()


def test_rescaled_model_is_equivalent():
    assert normalize_to_model(eval_jet("x^2/(1-2*y)", XY, 8)).ok
    assert normalize_to_model(eval_jet("x^2/(2*(1-y))", XY, 8)).ok


def test_pure_x_perturbation_hits_the_monge_family():
    F = eval_jet(LC + "+x^6", XY, 8)
    res = normalize_to_model(F)
    assert res.verdict == OBSTRUCTION
    w = res.witness
    assert (w["label"], w["equation"], w["index"]) == ("③", "monge", [6, 0])
    assert w["equation_nonzero_at"] is not None


@pytest.mark.parametrize("extra, index", [("x^3*y^3", [3, 3]), ("x^4*y^2", [4, 2])])
def test_mixed_perturbations_hit_the_w_family(extra, index):
    res = normalize_to_model(eval_jet(f"{LC}+{extra}", XY, 8))
    assert res.verdict == OBSTRUCTION
    assert (res.witness["label"], res.witness["index"]) == ("②", index)


@pytest.mark.parametrize("expr", ["x^2*(1+y)", "x^2*exp(y)"])
def test_wrong_y_profile_hits_the_hessian_family(expr):
    res = normalize_to_model(eval_jet(expr, XY, 8))
    assert res.verdict == OBSTRUCTION
    assert (res.witness["label"], res.witness["index"]) == ("①", [2, 2])


def test_generic_rank_one_jets_are_obstructed():
    # rank-one jets with free data rarely satisfy the remaining two equations
    F = random_rank_one(random.Random(4), 8)
    res = normalize_to_model(F)
    assert res.verdict == OBSTRUCTION
    assert res.witness["label"] in ("②", "③")


def test_propagated_model_data_normalizes():
    F = pde_propagate(PDEInitialData(), 8)
    assert F == model_jet(XY, 8)
    assert normalize_to_model(F).map.is_identity()


def test_preconditions():
    with pytest.raises(PreconditionFailed):
        normalize_to_model(eval_jet("x^3+y^2", XY, 8))
    with pytest.raises(PreconditionFailed):
        normalize_to_model(eval_jet("x^2", XY, 8))
    with pytest.raises(PreconditionFailed):
        normalize_to_model(eval_jet(LC, XY, 5))
    with pytest.raises(PreconditionFailed):
        normalize_to_model(eval_jet(LC, XY, 8), order=9)
    fl = JetSpace(("x", "y"), ("0", "0"), FloatBackend(128))
    with pytest.raises(TubeInvError):
        normalize_to_model(eval_jet(LC, fl, 8))


def test_result_serializes():
    res = normalize_to_model(eval_jet(LC + "+x^6", XY, 7))
    data = res.to_json_dict()
    assert data["verdict"] == OBSTRUCTION
    assert AffineMap.from_json_dict(data["map"]) == res.map
