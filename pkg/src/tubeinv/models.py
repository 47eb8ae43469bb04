"""Built-in library of graphing functions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Expr, eval_jet, parse
from .jet import Jet, JetSpace
from .scalars import EXACT, Backend, FloatBackend


@dataclass(frozen=True)
class ModelEntry:
    name: str
    text: str
    vars: tuple[str, ...]
    base: tuple[str, ...]
    backend: str
    provenance: str
    checks: tuple[str, ...] = field(default_factory=tuple)

    @property
    def expr(self) -> Expr:
        return parse(self.text)

    @property
    def dim(self) -> int:
        return len(self.vars)

    def make_backend(self, precision: int = 256) -> Backend:
        return EXACT if self.backend == "exact" else FloatBackend(precision)

    def space(self, backend: Backend | None = None) -> JetSpace:
        return JetSpace(self.vars, self.base, backend or self.make_backend())

    def jet(self, order: int, backend: Backend | None = None) -> Jet:
        return eval_jet(self.expr, self.space(backend), order)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "expr": self.text,
            "vars": list(self.vars),
            "base": dict(zip(self.vars, self.base)),
            "backend": self.backend,
            "provenance": self.provenance,
            "checks": list(self.checks),
        }


def _dy_vars(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n + 1))


def _build() -> dict[str, ModelEntry]:
    out: list[ModelEntry] = [
        ModelEntry("parabola", "x^2", ("x",), ("0",), "exact",
                   "spherical tube curve; affine model of the Halphen class",
                   ("cartan_tube=0", "halphen=0", "monge=0")),
        ModelEntry("exp", "exp(x)", ("x",), ("0",), "exact",
                   "spherical tube curve not affinely equivalent to the parabola",
                   ("cartan_tube=0", "halphen!=0")),
        ModelEntry("arcsin_exp", "arcsin(exp(x))", ("x",), ("-1",), "float",
                   "spherical tube curve, evaluated where exp(x) < 1",
                   ("cartan_tube=0", "halphen!=0")),
        ModelEntry("arcsinh_exp", "arcsinh(exp(x))", ("x",), ("0",), "float",
                   "spherical tube curve",
                   ("cartan_tube=0", "halphen!=0")),
        ModelEntry("lc_tube", "x^2/(1-y)", ("x", "y"), ("0", "0"), "exact",
                   "Levi rank one, 2-nondegenerate flat tube model",
                   ("hessian_det=0", "w_aff=0", "j_aff=0", "j_tilde=0")),
        ModelEntry("cone", "x^2/(2*(1-y))", ("x", "y"), ("0", "0"), "exact",
                   "half of the tube model; same affine class up to scaling u",
                   ("hessian_det=0", "w_aff=0")),
        ModelEntry("conic", "x^2/(1-x)", ("x",), ("0",), "exact",
                   "graph lies on the hyperbola x^2 + x*u - u = 0",
                   ("monge=0", "halphen!=0")),
    ]
    for n in (1, 2, 3):
        xs = _dy_vars(n)
        for nu in range(n + 1):
            parts = [f"exp({v})" for v in xs[:nu]] + [f"{v}^2" for v in xs[nu:]]
            out.append(ModelEntry(
                f"dy_a_n{n}_nu{nu}", "+".join(parts), xs, ("0",) * n, "exact",
                f"spherical tube with positive Hessian, family (a), n={n}, nu={nu}",
                ("hessian_signature=(n,0)",) + (("cartan_tube=0",) if n == 1 else ()),
            ))
    for n in (1, 2):
        xs = _dy_vars(n)
        s = "+".join(f"exp({v})" for v in xs)
        out.append(ModelEntry(
            f"dy_b_n{n}", f"arcsin({s})", xs, ("-1",) * n, "float",
            f"spherical tube, family (b), n={n}",
            ("hessian_signature=(n,0)",) + (("cartan_tube=0",) if n == 1 else ()),
        ))
        d = "-".join(["1"] + [f"exp({v})" for v in xs])
        out.append(ModelEntry(
            f"dy_c_n{n}", f"log({d})", xs, ("-1",) * n, "float",
            f"spherical tube, family (c), n={n}; the Hessian is negative definite",
            ("hessian_signature=(0,n)",) + (("cartan_tube=0",) if n == 1 else ()),
        ))
    return {m.name: m for m in out}


MODELS: dict[str, ModelEntry] = _build()


def get_model(name: str) -> ModelEntry:
    try:
        return MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; known models: {', '.join(sorted(MODELS))}") from None
