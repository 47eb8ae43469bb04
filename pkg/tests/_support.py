"""Shared strategies and random generators for the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

import hypothesis.strategies as st

from tubeinv.jet import Jet, JetSpace, count, monomials
from tubeinv.pde import rank_one_jet
from tubeinv.scalars import EXACT

XY = JetSpace(("x", "y"), (0, 0), EXACT)
X = JetSpace(("x",), (0,), EXACT)

small_rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5))
nonzero_rationals = small_rationals.filter(lambda q: q != 0)


@st.composite
def jets(draw, space: JetSpace = XY, order: int = 4, unit: bool = False):
    n = count(space.n, order)
    coeffs = draw(st.lists(small_rationals, min_size=n, max_size=n))
    if unit and coeffs[0] == 0:
        coeffs[0] = Fraction(1)
    return Jet(space, order, [EXACT.scalar(c) for c in coeffs])


def random_jet(rng: random.Random, space: JetSpace, order: int, lead: dict | None = None) -> Jet:
    coeffs = {a: Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for a in monomials(space.n, order)}
    coeffs.update(lead or {})
    return space.from_dict(coeffs, order)


def random_rank_one(rng: random.Random, order: int, space: JetSpace = XY) -> Jet:
    """Rank-one jet with ``F_xx != 0`` and ``S_num != 0`` at the base."""
    while True:
        f0 = {j: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for j in range(order + 1)}
        f1 = {j: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for j in range(order)}
        if f0[2] == 0:
            continue
        F = rank_one_jet(space, f0, f1, order)
        s = F.coeff((2, 0)) * 2 * F.coeff((2, 1)) * 2 - F.coeff((1, 1)) * F.coeff((3, 0)) * 6
        if s != 0:
            return F
