"""Invariant formulas written once, generic over the value algebra.

Each function takes derivations (callables) and functions, and only uses
``+ - * /`` and integer scalars, so the same code runs on real jets, complex
jets and the symbolic :mod:`tubeinv.diffalg` algebra.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

Derivation = Callable

_1_3 = Fraction(1, 3)
_2_3 = Fraction(2, 3)
_1_6 = Fraction(1, 6)
_5_6 = Fraction(5, 6)
_1_9 = Fraction(1, 9)
_5_18 = Fraction(5, 18)
_20_27 = Fraction(20, 27)
_2_27 = Fraction(2, 27)


def cartan_expression(L: Derivation, Lb: Derivation, Pb):
    """Sphericity invariant of a Levi nondegenerate hypersurface in C^2."""
    LPb = L(Pb)
    LbPb = Lb(Pb)
    return (
        -2 * Lb(L(LbPb))
        + 3 * Lb(Lb(LPb))
        - 7 * Pb * Lb(LPb)
        + 4 * Pb * L(LbPb)
        - LPb * LbPb
        + 2 * Pb * Pb * LPb
    )


def w0_expression(K: Derivation, L1: Derivation, Lb1: Derivation, k, kbar, i_Tk):
    """First primary invariant; ``i_Tk`` is ``i`` times the commutator field applied to k."""
    s = Lb1(k)
    ss = Lb1(s)
    sbar = Lb1(kbar)
    return (
        -_1_3 * K(ss) / (s * s)
        + _1_3 * K(s) * ss / (s * s * s)
        + _2_3 * L1(sbar) / sbar
        + _2_3 * L1(s) / s
        + _1_3 * i_Tk / s
    )


def j0bar_expression(Lb1: Derivation, k, Pb):
    """Conjugate of the second primary invariant."""
    s1 = Lb1(k)
    s2 = Lb1(s1)
    s3 = Lb1(s2)
    s4 = Lb1(s3)
    LPb = Lb1(Pb)
    r2 = s2 / s1
    return (
        _1_6 * s4 / s1
        - _5_6 * s3 * s2 / (s1 * s1)
        - _1_6 * s3 / s1 * Pb
        + _20_27 * r2 * r2 * r2
        + _5_18 * r2 * r2 * Pb
        + _1_6 * r2 * LPb
        - _1_9 * r2 * Pb * Pb
        - _1_6 * Lb1(LPb)
        + _1_3 * LPb * Pb
        - _2_27 * Pb * Pb * Pb
    )


def j_tilde_expression(L1: Derivation, P):
    """Part of the second invariant that survives once the first one vanishes."""
    LP = L1(P)
    return -_1_6 * L1(LP) + _1_3 * LP * P - _2_27 * P * P * P
