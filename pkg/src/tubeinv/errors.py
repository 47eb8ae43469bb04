"""Exception hierarchy shared by every module."""

from __future__ import annotations


class TubeInvError(Exception):
    """Base class for all library errors."""


class VariableMismatch(TubeInvError, ValueError):
    """Two jets do not live on the same variables / base point / backend."""


class OrderTooLow(TubeInvError, ValueError):
    """The jet is too shallow for the requested computation."""


class NonUnitDivisor(TubeInvError, ZeroDivisionError):
    """Division by a jet whose constant term is zero (or below tolerance)."""


class DomainError(TubeInvError, ValueError):
    """Base point outside the analyticity domain of an elementary function."""


class NeedsFloatBackend(TubeInvError, ValueError):
    """An exact computation would need an irrational value."""


class PreconditionFailed(TubeInvError):
    """A mathematical hypothesis of an operation does not hold.

    ``hypothesis`` names the failed condition (e.g. ``"F_xx != 0"``).
    """

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        self.detail = detail
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)


class GraphConditionError(PreconditionFailed):
    """An affine image of a graph is no longer a graph at the base point."""

    def __init__(self, detail: str = ""):
        super().__init__("graph condition", detail)


class ParseError(TubeInvError, ValueError):
    """Malformed expression text; ``offset`` is the 0-based character position."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")
