from __future__ import annotations

import json
import subprocess
import sys

import pytest

from tubeinv.cli import dumps, main, run
from tubeinv.jet import Jet
from tubeinv.transform import AffineMap

LC = "x^2/(1-y)"


def verdicts(payload) -> dict:
    return {v["invariant"]: v["verdict"] for v in payload["report"]["invariants"]}


def test_invariants_on_the_model():
    code, out = run(["invariants", "--model", "lc_tube", "--order", "10", "--cr"])
    assert code == 0 and out["schema"] == "1"
    v = verdicts(out)
    assert v.pop("s_aff") == v.pop("s_aff_numerator") == "nonzero"
    assert set(v.values()) == {"exact-zero"}
    assert {c["invariant"]: c["verdict"] for c in out["cr"]} == {"w0": "exact-zero", "j0": "exact-zero"}


def test_invariant_names_filter():
    code, out = run(["invariants", "--expr", "exp(x)", "--names", "halphen"])
    assert code == 0
    assert list(verdicts(out)) == ["halphen"]
    code, out = run(["invariants", "--expr", "exp(x)", "--names", "bogus"])
    assert code == 1


@pytest.mark.parametrize("argv, cls", [
    (["--expr", "x^2"], "affinely-parabola"),
    (["--expr", "exp(x)"], "spherical"),
    (["--model", "arcsinh_exp"], "spherical"),
    (["--expr", "x^2+x^5"], "not-spherical"),
    (["--expr", LC], "flat"),
    (["--expr", LC + "+x^3/(1-y)^2"], "not-flat"),
    (["--expr", LC + "+x^6"], "outside-class"),
    (["--expr", "x^2+y^2"], "outside-class"),
    (["--model", "dy_a_n3_nu1"], "signature-only"),
])
def test_classify(argv, cls):
    code, out = run(["classify", *argv])
    assert code == 0
    assert out["classification"] == cls


def test_classify_float_reports_below_tolerance():
    code, out = run(["classify", "--model", "arcsin_exp"])
    assert out["verdicts"]["cartan_tube"] == "below-tolerance"
    assert out["verdicts"]["halphen"] == "nonzero"
    assert out["hessian_signature"] == [1, 0, 0]


def test_transform_with_explicit_map(tmp_path):
    g = {"matrix": [["1", "0", "0"], ["0", "1", "0"], ["1", "0", "2"]], "translation": ["0", "0", "0"]}
    path = tmp_path / "map.json"
    path.write_text(json.dumps(g))
    code, out = run(["transform", "--expr", LC, "--order", "5", "--map", "@" + str(path)])
    assert code == 0
    assert out["delta"] == "2"
    assert out["factors_at_base"]["mu"] == "2"
    jet = Jet.from_json_dict(out["jet"])
    assert jet.coeff((1, 0)) == 1 and jet.coeff((2, 0)) == 2


def test_transform_seed_is_reproducible():
    a = run(["transform", "--expr", LC, "--seed", "3"])[1]
    b = run(["transform", "--expr", LC, "--seed", "3"])[1]
    assert a == b
    assert AffineMap.from_json_dict(a["map"]).near_identity()


def test_normalize_verdicts():
    code, out = run(["normalize", "--expr", LC])
    assert (code, out["verdict"]) == (0, "equivalent-to-model")
    code, out = run(["normalize", "--expr", LC + "+x^6"])
    assert (code, out["verdict"], out["witness"]["label"]) == (0, "obstruction", "③")
    code, out = run(["normalize", "--expr", "x^3+y^2"])
    assert code == 2 and out["hypothesis"] == "F_xx != 0"
    code, _ = run(["normalize", "--expr", LC, "--backend", "float"])
    assert code == 1


def test_verify_laws():
    code, out = run(["verify-laws", "--expr", LC, "--trials", "2"])
    assert code == 0
    assert all(r["ok"] for r in out["laws"]) and len(out["laws"]) == 7
    code, out = run(["verify-laws", "--expr", "exp(x)", "--laws", "halphen,monge", "--trials", "2"])
    assert [r["law"] for r in out["laws"]] == ["halphen", "monge"]
    assert all(r["ok"] for r in out["laws"])


def test_propagate(tmp_path):
    code, out = run(["propagate", "--order", "7", "--check"])
    assert code == 0
    assert out["compatibility"]["max_residual"] == "0"
    assert all(out["pde_residuals_zero"].values())
    code, out = run(["propagate", "--values", "0,0,2,1,0,1,0,3", "--order", "6"])
    assert code == 0
    path = tmp_path / "init.json"
    path.write_text(json.dumps(out["init"]))
    code, again = run(["propagate", "--init", "@" + str(path), "--order", "6"])
    assert again["jet"] == out["jet"]
    assert run(["propagate", "--values", "1,2"])[0] == 1
    assert run(["propagate", "--values", "0,0,0,0,0,0,0,0"])[0] == 2


def test_models():
    code, out = run(["models", "--list"])
    assert code == 0 and len(out["models"]) == len({m["name"] for m in out["models"]})
    code, out = run(["models", "--name", "lc_tube"])
    assert out["model"]["expr"] == LC
    assert run(["models", "--name", "nope"])[0] == 1


def test_jet_file_input(tmp_path):
    code, out = run(["transform", "--expr", LC, "--order", "7", "--seed", "1"])
    path = tmp_path / "jet.json"
    path.write_text(json.dumps(out["jet"]))
    code, norm = run(["normalize", "--file", str(path)])
    assert (code, norm["verdict"]) == (0, "equivalent-to-model")
    assert run(["normalize", "--file", str(path), "--order", "9"])[0] == 1


@pytest.mark.parametrize("argv", [
    [],
    ["invariants"],
    ["invariants", "--expr", "x+*y"],
    ["invariants", "--expr", "x", "--model", "exp"],
    ["invariants", "--expr", "exp(x)", "--base", "1"],
    ["invariants", "--expr", "x*z", "--vars", "x,y"],
    ["invariants", "--model", "nope"],
    ["frobnicate"],
])
def test_usage_errors_exit_one(argv):
    code, out = run(argv)
    assert code == 1
    assert out["error"] == "usage"


def test_parse_error_mentions_the_offset():
    _, out = run(["invariants", "--expr", "x+*y"])
    assert "offset 2" in out["detail"]


def test_batch_keeps_order(tmp_path):
    cmds = [["classify", "--expr", "exp(x)"], {"args": ["normalize", "--expr", LC]}, ["models", "--name", "bad"]]
    path = tmp_path / "batch.json"
    path.write_text(json.dumps(cmds))
    for jobs in ("1", "2"):
        code, out = run(["batch", "--file", str(path), "--jobs", jobs])
        assert code == 0
        assert [r["exit"] for r in out["results"]] == [0, 0, 1]
        assert out["results"][0]["output"]["classification"] == "spherical"


def test_main_writes_sorted_json(tmp_path, capsys):
    assert main(["models", "--name", "exp"]) == 0
    text = capsys.readouterr().out
    assert text == dumps(json.loads(text))
    target = tmp_path / "out.json"
    assert main(["models", "--name", "exp", "--out", str(target)]) == 0
    assert target.read_text() == text
    assert main(["invariants"]) == 1
    assert "usage" in capsys.readouterr().err


def test_console_script_is_byte_stable():
    argv = [sys.executable, "-m", "tubeinv.cli", "invariants", "--model", "lc_tube", "--order", "8", "--cr"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.endswith(b"\n")
