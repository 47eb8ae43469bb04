"""Exact jet computations of affine and CR relative invariants of graphs."""

from .errors import (
    DomainError,
    GraphConditionError,
    NeedsFloatBackend,
    NonUnitDivisor,
    OrderTooLow,
    ParseError,
    PreconditionFailed,
    TubeInvError,
    VariableMismatch,
)
from .jet import Jet, JetSpace, analytic_lift, compose, implicit_solve
from .scalars import EXACT, FloatBackend, make_backend

__all__ = [
    "DomainError",
    "EXACT",
    "FloatBackend",
    "GraphConditionError",
    "Jet",
    "JetSpace",
    "NeedsFloatBackend",
    "NonUnitDivisor",
    "OrderTooLow",
    "ParseError",
    "PreconditionFailed",
    "TubeInvError",
    "VariableMismatch",
    "analytic_lift",
    "compose",
    "implicit_solve",
    "make_backend",
]
