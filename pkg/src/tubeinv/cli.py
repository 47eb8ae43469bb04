"""Command line front end; every command prints one JSON document.

Exit status: 0 when the computation ran (whatever the verdicts), 1 for usage
errors, 2 when a mathematical hypothesis of the computation fails.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import affine_invariants as ai
from . import cr
from .errors import NeedsFloatBackend, OrderTooLow, PreconditionFailed, TubeInvError
from .expr import default_vars, eval_jet, parse
from .jet import Jet, JetSpace
from .models import MODELS, get_model
from .normalize import normalize_to_model
from .pde import PDEInitialData, compatibility_check, pde_propagate, pde_residuals
from .scalars import make_backend
from .transform import AffineMap, applicable_laws, factors, random_near_identity, transform_graph, verify_law

SCHEMA = "1"
EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# inputs


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _backend(args, default: str = "exact"):
    name = args.backend or default
    return make_backend(name, args.precision, args.tolerance)


def _order(args) -> int:
    return args.default_order if args.order is None else args.order


def load_jet(args) -> tuple[Jet, dict]:
    """Build the input jet from exactly one of --expr / --model / --file."""
    if args.model:
        try:
            m = get_model(args.model)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        be = _backend(args, m.backend)
        base = tuple(_split(args.base)) if args.base else m.base
        if len(base) != m.dim:
            raise UsageError(f"--base needs {m.dim} values for model {m.name}")
        space = JetSpace(m.vars, base, be)
        return eval_jet(m.expr, space, _order(args)), {"model": m.name, "expr": m.text}
    if args.file:
        try:
            data = json.loads(Path(args.file).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read jet file {args.file}: {exc}") from None
        be = _backend(args, "exact" if data.get("backend", "exact") == "exact" else "float")
        jet = Jet.from_json_dict(data, be)
        if args.order is None:
            return jet, {"file": args.file}
        if args.order > jet.order:
            raise UsageError(f"--order {args.order} exceeds the stored jet order {jet.order}")
        return jet.truncate(args.order), {"file": args.file}
    e = parse(args.expr)
    if args.vars:
        names = tuple(_split(args.vars))
    else:
        names = default_vars(e)
        if args.dim:
            pad = ("x", "y", "z")[: args.dim]
            names = tuple(dict.fromkeys(names + tuple(v for v in pad if v not in names)))
        names = names or ("x",)
    missing = set(default_vars(e)) - set(names)
    if missing:
        raise UsageError(f"expression uses variables {sorted(missing)} not listed in --vars")
    if args.dim and len(names) != args.dim:
        raise UsageError(f"--dim {args.dim} does not match variables {list(names)}")
    base = tuple(_split(args.base)) if args.base else ("0",) * len(names)
    if len(base) != len(names):
        raise UsageError(f"--base has {len(base)} values for {len(names)} variables")
    space = JetSpace(names, base, _backend(args))
    return eval_jet(e, space, _order(args)), {"expr": args.expr}


def _load_map(args, size: int) -> AffineMap:
    if args.map:
        text = args.map
        if text.startswith("@"):
            text = Path(text[1:]).read_text()
        try:
            g = AffineMap.from_json_dict(json.loads(text))
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"bad --map: {exc}") from None
        if g.size != size:
            raise UsageError(f"--map must be {size}x{size} for this input")
        return g
    return random_near_identity(random.Random(args.seed), size)


# --------------------------------------------------------------------------
# commands


def cmd_invariants(args) -> dict:
    F, source = load_jet(args)
    names = _split(args.names) if args.names else None
    try:
        report = ai.invariant_report(F, names, args.tolerance)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    out = {"input": source, "report": report.to_json_dict()}
    if args.cr:
        out["cr"] = _cr_values(F, report.tolerance)
    return out


def _cr_values(F: Jet, tol) -> list[dict]:
    G = cr.CRGraph.tube(F)
    fns = {"cartan_general": cr.cartan_general} if G.kind == "c2" else {"w0": cr.w0, "j0": cr.j0}
    out = []
    for name, fn in fns.items():
        try:
            v = fn(G)
        except (PreconditionFailed, OrderTooLow) as exc:
            out.append({"invariant": name, "verdict": ai.PRECONDITION_FAILED, "detail": str(exc)})
            continue
        verdicts = {ai.verdict(v.re, tol), ai.verdict(v.im, tol)}
        verdict = ai.NONZERO if ai.NONZERO in verdicts else verdicts.pop()
        out.append({"invariant": name, "verdict": verdict, "order": v.order, "value_coeffs": v.to_json_dict()})
    return out


def _classify_curve(v: dict) -> str:
    if v.get("halphen") in (ai.EXACT_ZERO, ai.BELOW_TOLERANCE):
        return "affinely-parabola"
    if v.get("cartan_tube") in (ai.EXACT_ZERO, ai.BELOW_TOLERANCE):
        return "spherical"
    if v.get("cartan_tube") == ai.NONZERO:
        return "not-spherical"
    return "undetermined"


def _classify_surface(F: Jet, v: dict) -> str:
    G = ai.as_graph(F)
    zero = (ai.EXACT_ZERO, ai.BELOW_TOLERANCE)
    if not G.fxx_nonzero or v.get("hessian_det") not in zero or not G.s_num_nonzero:
        return "outside-class"
    if v.get("w_aff_numerator") in zero and v.get("j_tilde") in zero:
        return "flat"
    return "not-flat"


def cmd_classify(args) -> dict:
    F, source = load_jet(args)
    n = F.space.n
    if n == 1:
        names = ["halphen", "cartan_tube", "monge"]
    elif n == 2:
        names = ["hessian_det", "s_aff_numerator", "w_aff_numerator", "j_tilde"]
    else:
        names = []
    report = ai.invariant_report(F, names, args.tolerance) if names else None
    verdicts = report.verdicts() if report else {}
    out = {"input": source, "verdicts": verdicts, "hessian_signature": list(ai.hessian_signature(F))}
    if report:
        out["tolerance"] = str(report.tolerance)
    if n == 1:
        out["classification"] = _classify_curve(verdicts)
    elif n == 2:
        out["classification"] = _classify_surface(F, verdicts)
        out["hypotheses"] = ai.as_graph(F).flags()
    else:
        out["classification"] = "signature-only"
    return out


def cmd_transform(args) -> dict:
    F, source = load_jet(args)
    g = _load_map(args, F.space.n + 1)
    Fp = transform_graph(g, F)
    fa = factors(g, F, Fp)
    return {
        "input": source,
        "map": g.to_json_dict(),
        "near_identity": g.near_identity(),
        "delta": str(g.delta),
        "jet": Fp.to_json_dict(),
        "factors_at_base": {
            "Lambda": F.backend.to_str(fa.Lambda.constant),
            "mu": F.backend.to_str(fa.mu.constant),
            **({"Upsilon": F.backend.to_str(fa.Upsilon.constant)} if fa.Upsilon is not None else {}),
        },
    }


def cmd_normalize(args) -> dict:
    F, source = load_jet(args)
    if not F.backend.exact:
        raise UsageError("normalize needs the exact backend")
    res = normalize_to_model(F, args.order)
    return {"input": source, **res.to_json_dict()}


def cmd_verify_laws(args) -> dict:
    F, source = load_jet(args)
    laws = _split(args.laws) if args.laws else applicable_laws(F)
    rng = random.Random(args.seed)
    maps = [_load_map(args, F.space.n + 1)] if args.map else [
        random_near_identity(rng, F.space.n + 1) for _ in range(args.trials)
    ]
    results = []
    for law in laws:
        ok = True
        order = None
        for g in maps:
            try:
                chk = verify_law(law, g, F)
            except KeyError as exc:
                raise UsageError(str(exc.args[0])) from None
            ok = ok and chk.ok
            order = chk.order
        results.append({"law": law, "ok": ok, "trials": len(maps), "residual_order": order})
    return {"input": source, "seed": args.seed, "laws": results}


def cmd_propagate(args) -> dict:
    if args.init:
        text = args.init[1:] if args.init.startswith("@") else None
        try:
            data = json.loads(Path(text).read_text() if text else args.init)
            init = PDEInitialData.from_json_dict(data)
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad --init: {exc}") from None
    elif args.values:
        vals = _split(args.values)
        if len(vals) != 8:
            raise UsageError("--values needs 8 comma separated numbers")
        init = PDEInitialData.from_tuple(vals)
    else:
        init = PDEInitialData()
    if args.order < 5:
        raise UsageError("propagate needs --order >= 5")
    be = _backend(args)
    F = pde_propagate(init, args.order, be)
    out = {"init": init.to_json_dict(), "jet": F.to_json_dict()}
    if args.check:
        rep = compatibility_check(init, args.order, be)
        out["compatibility"] = rep.to_json_dict(be)
        out["pde_residuals_zero"] = {k: r.is_zero() for k, r in pde_residuals(F).items()}
    return out


def cmd_models(args) -> dict:
    if args.name:
        try:
            return {"model": get_model(args.name).describe()}
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    return {"models": [MODELS[k].describe() for k in sorted(MODELS)]}


def _run_entry(entry) -> dict:
    argv = entry["args"] if isinstance(entry, dict) else entry
    code, payload = run([str(a) for a in argv])
    return {"args": list(argv), "exit": code, "output": payload}


def cmd_batch(args) -> dict:
    try:
        entries = json.loads(Path(args.file).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read batch file: {exc}") from None
    if not isinstance(entries, list):
        raise UsageError("batch file must hold a JSON array of commands")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_entry, entries))
    else:
        results = [_run_entry(e) for e in entries]
    return {"results": results}


# --------------------------------------------------------------------------
# parser


def _add_input(p: argparse.ArgumentParser, order: int = 8):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--expr", help="graphing function, e.g. 'x^2/(1-y)'")
    src.add_argument("--model", help="name of a built-in model (see 'models --list')")
    src.add_argument("--file", help="jet JSON file")
    p.add_argument("--vars", help="comma separated variable names")
    p.add_argument("--dim", type=int, choices=(1, 2, 3), help="number of base variables")
    p.add_argument("--base", help="comma separated base point (rationals)")
    p.add_argument("--order", type=int, help=f"jet order (default {order}, or the stored order for --file)")
    p.set_defaults(default_order=order)
    _add_backend(p)


def _add_backend(p: argparse.ArgumentParser):
    p.add_argument("--backend", choices=("exact", "float"))
    p.add_argument("--precision", type=int, default=256, help="bits for the float backend")
    p.add_argument("--tolerance", help="vanishing threshold for the float backend")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tubeinv", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub_add = sub.add_parser
    sub.add_parser = lambda *a, **kw: sub_add(*a, parents=[common], **kw)

    p = sub.add_parser("invariants", help="affine invariant report")
    _add_input(p)
    p.add_argument("--names", help="comma separated invariant names")
    p.add_argument("--cr", action="store_true", help="also evaluate the CR invariants of the tube")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("classify", help="sphericity / flatness classification")
    _add_input(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("transform", help="image of the graph under an affine map")
    _add_input(p)
    p.add_argument("--map", help="map JSON (or @file); random near-identity map when omitted")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("normalize", help="normalize to u = x^2/(1-y)")
    _add_input(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("verify-laws", help="check transformation laws on random maps")
    _add_input(p, order=6)
    p.add_argument("--laws", help="comma separated law ids (default: all applicable)")
    p.add_argument("--map", help="map JSON (or @file) instead of random maps")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_laws)

    p = sub.add_parser("propagate", help="jet of the flat-tube PDE system from initial data")
    init = p.add_mutually_exclusive_group()
    init.add_argument("--init", help="initial data JSON (or @file)")
    init.add_argument("--values", help="u00,u10,u20,u30,u40,u01,u11,u21")
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--check", action="store_true", help="add the compatibility report")
    _add_backend(p)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("models", help="built-in model catalogue")
    p.add_argument("--list", action="store_true", help="list every model (default)")
    p.add_argument("--name", help="describe one model")
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("batch", help="run a JSON array of commands")
    p.add_argument("--file", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_batch)
    return parser


def run(argv: list[str]) -> tuple[int, dict]:
    """Parse and execute; returns the exit status and the JSON payload."""
    code, payload, _ = _execute(argv)
    return code, payload


def _execute(argv: list[str]) -> tuple[int, dict, str | None]:
    out = None
    try:
        args = build_parser().parse_args(argv)
        if (getattr(args, "order", None) or 0) < 0:
            raise UsageError("--order must be non-negative")
        out = args.out
        payload = args.func(args)
    except UsageError as exc:
        return EXIT_USAGE, {"schema": SCHEMA, "error": "usage", "detail": str(exc)}, out
    except NeedsFloatBackend as exc:
        return EXIT_USAGE, {"schema": SCHEMA, "error": "usage", "detail": f"{exc} (try --backend float)"}, out
    except PreconditionFailed as exc:
        return EXIT_PRECONDITION, {
            "schema": SCHEMA, "error": "precondition-failed", "hypothesis": exc.hypothesis, "detail": exc.detail,
        }, out
    except (TubeInvError, ValueError) as exc:
        return EXIT_USAGE, {"schema": SCHEMA, "error": "usage", "detail": str(exc)}, out
    return EXIT_OK, {"schema": SCHEMA, "command": args.command, **payload}, out


def dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    code, payload, out = _execute(argv)
    text = dumps(payload)
    if code == EXIT_USAGE:
        sys.stderr.write(text)
    elif out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
