"""Jet propagation for the solved-form PDE system of flat rank-one tubes.

The system, for ``F(x, y)`` with ``F_xx != 0``::

    F_yy    = F_xy**2 / F_xx
    F_xxxy  = F_xy/F_xx * F_xxxx + 2 F_xxx F_xxy / F_xx - 2 F_xy F_xxx**2 / F_xx**2
    F_xxxxx = 5 F_xxx F_xxxx / F_xx - 40/9 F_xxx**3 / F_xx**2

Every Taylor coefficient is filled from eight initial values by reading the
needed coefficient of a right-hand side evaluated on the partially filled
jet.  Entries are filled in storage order, which guarantees that each
right-hand side coefficient only involves entries already known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .errors import NonUnitDivisor, OrderTooLow, PreconditionFailed
from .jet import Jet, JetSpace, count, index_of, monomials
from .scalars import EXACT, Backend

INIT_KEYS = ("u00", "u10", "u20", "u30", "u40", "u01", "u11", "u21")
_INIT_INDEX = {"u00": (0, 0), "u10": (1, 0), "u20": (2, 0), "u30": (3, 0), "u40": (4, 0),
               "u01": (0, 1), "u11": (1, 1), "u21": (2, 1)}


@dataclass(frozen=True)
class PDEInitialData:
    """Derivative values ``F_{x^j y^k}(0, 0)`` fixing a solution."""

    u00: object = 0
    u10: object = 0
    u20: object = 2
    u30: object = 0
    u40: object = 0
    u01: object = 0
    u11: object = 0
    u21: object = 2

    def values(self, backend: Backend = EXACT) -> dict:
        return {(j, k): backend.scalar(getattr(self, key)) for key, (j, k) in _INIT_INDEX.items()}

    def to_json_dict(self) -> dict:
        out = {}
        for key in INIT_KEYS:
            v = getattr(self, key)
            out[key] = v if isinstance(v, str) else EXACT.to_str(EXACT.scalar(v))
        return out

    @classmethod
    def from_json_dict(cls, data: Mapping) -> PDEInitialData:
        unknown = set(data) - set(INIT_KEYS)
        if unknown:
            raise ValueError(f"unknown initial data keys {sorted(unknown)}")
        return cls(**{k: data[k] for k in INIT_KEYS if k in data})

    @classmethod
    def from_tuple(cls, values) -> PDEInitialData:
        return cls(*values)


def _d(F: Jet, a: int, b: int) -> Jet:
    return F.partial((a, b))


def rhs_hessian(F: Jet) -> Jet:
    return _d(F, 1, 1) ** 2 / _d(F, 2, 0)


def rhs_w(F: Jet) -> Jet:
    fxx, fxy, fxxx, fxxy, fxxxx = _d(F, 2, 0), _d(F, 1, 1), _d(F, 3, 0), _d(F, 2, 1), _d(F, 4, 0)
    return fxy / fxx * fxxxx + 2 * fxxx * fxxy / fxx - 2 * fxy * fxxx**2 / fxx**2


def rhs_monge(F: Jet) -> Jet:
    fxx, fxxx, fxxxx = _d(F, 2, 0), _d(F, 3, 0), _d(F, 4, 0)
    return 5 * fxxx * fxxxx / fxx - Fraction(40, 9) * fxxx**3 / fxx**2


# (name, lhs multi-index, rhs builder)
EQUATIONS: tuple[tuple[str, tuple[int, int], Callable], ...] = (
    ("F_yy", (0, 2), rhs_hessian),
    ("F_xxxy", (3, 1), rhs_w),
    ("F_xxxxx", (5, 0), rhs_monge),
)


def _falling(n: int, k: int) -> int:
    return math.factorial(n) // math.factorial(n - k)


def _route_value(F: Jet, target: tuple[int, int], lhs: tuple[int, int], rhs: Callable):
    """Coefficient of ``target`` predicted by differentiating one equation.

    ``F`` must contain every coefficient the prediction depends on; the
    prediction is ``d^(target-lhs) rhs`` at 0 converted to a Taylor coefficient.
    """
    shift = (target[0] - lhs[0], target[1] - lhs[1])
    d = sum(target)
    R = rhs(F.truncate(d))
    c = R.coeff(shift)
    # Taylor coefficient of d^lhs F at ``shift`` is c_target * target!/shift!
    return c / (_falling(target[0], lhs[0]) * _falling(target[1], lhs[1]))


def _routes(target: tuple[int, int]):
    return [(name, lhs, rhs) for name, lhs, rhs in EQUATIONS if target[0] >= lhs[0] and target[1] >= lhs[1]]


def _primary_route(target: tuple[int, int]):
    j, k = target
    if k >= 2:
        return EQUATIONS[0]
    if k == 1:
        return EQUATIONS[1]
    return EQUATIONS[2]


def _fill(space: JetSpace, known: dict, order: int, free: Callable[[tuple], bool]) -> Jet:
    be = space.backend
    coeffs = [be.zero] * count(2, order)
    for alpha, v in known.items():
        if sum(alpha) <= order:
            coeffs[index_of(alpha)] = v
    for i, alpha in enumerate(monomials(2, order)):
        if free(alpha):
            continue
        d = sum(alpha)
        F = Jet(space, d, coeffs[: count(2, d)])
        name, lhs, rhs = _primary_route(alpha)
        coeffs[i] = _route_value(F, alpha, lhs, rhs)
    return Jet(space, order, coeffs)


def _initial_free(alpha) -> bool:
    j, k = alpha
    return (k == 0 and j <= 4) or (k == 1 and j <= 2)


def pde_propagate(init: PDEInitialData, order: int, backend: Backend = EXACT) -> Jet:
    """Jet of the solution of the solved-form system at the origin."""
    if order < 5:
        raise OrderTooLow("propagation needs order >= 5")
    vals = init.values(backend)
    if vals[(2, 0)] == 0:
        raise PreconditionFailed("F_xx != 0", "u20 must be nonzero")
    known = {}
    for (j, k), v in vals.items():
        known[(j, k)] = v / (math.factorial(j) * math.factorial(k))
    space = JetSpace(("x", "y"), (0, 0), backend)
    try:
        return _fill(space, known, order, _initial_free)
    except NonUnitDivisor as exc:
        raise PreconditionFailed("F_xx != 0", str(exc)) from exc


def rank_one_jet(space: JetSpace, f0: Mapping[int, object], f1: Mapping[int, object], order: int) -> Jet:
    """Jet with identically vanishing Hessian from the Cauchy data
    ``F(x, 0)`` and ``F_y(x, 0)`` (Taylor coefficients by power of x)."""
    if space.n != 2:
        raise ValueError("rank_one_jet needs two variables")
    be = space.backend
    known = {}
    for j, v in f0.items():
        known[(j, 0)] = be.scalar(v)
    for j, v in f1.items():
        known[(j, 1)] = be.scalar(v)
    if not known.get((2, 0)):
        raise PreconditionFailed("F_xx != 0", "the x^2 coefficient must be nonzero")
    return _fill(space, known, order, lambda a: a[1] <= 1)


@dataclass
class CompatibilityReport:
    order: int
    entries: list = field(default_factory=list)

    @property
    def max_residual(self):
        return max((abs(e["residual"]) for e in self.entries), default=0)

    @property
    def ok(self) -> bool:
        return all(e["residual"] == 0 for e in self.entries)

    def to_json_dict(self, backend: Backend = EXACT) -> dict:
        return {
            "order": self.order,
            "checked": len(self.entries),
            "max_residual": backend.to_str(self.max_residual),
            "entries": [
                {
                    "index": list(e["index"]),
                    "routes": {k: backend.to_str(v) for k, v in e["routes"].items()},
                    "residual": backend.to_str(e["residual"]),
                }
                for e in self.entries
            ],
        }


def compatibility_check(init: PDEInitialData, order: int, backend: Backend = EXACT) -> CompatibilityReport:
    """Compare every coefficient reachable through more than one equation."""
    F = pde_propagate(init, order, backend)
    report = CompatibilityReport(order)
    for alpha in monomials(2, order):
        routes = _routes(alpha)
        if len(routes) < 2:
            continue
        values = {name: _route_value(F, alpha, lhs, rhs) for name, lhs, rhs in routes}
        vs = list(values.values())
        residual = max((abs(v - vs[0]) for v in vs[1:]), default=backend.zero)
        report.entries.append({"index": alpha, "routes": values, "residual": residual})
    return report


def pde_residuals(F: Jet) -> dict[str, Jet]:
    """Residual jets ``d^lhs F - rhs(F)`` of the three solved equations."""
    out = {}
    for name, lhs, rhs in EQUATIONS:
        out[name] = F.partial(lhs) - rhs(F)
    return out
