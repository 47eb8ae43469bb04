"""Univariate Taylor coefficients of the elementary functions.

``taylor_coefficients(fn, a0, N, backend)`` returns ``[c_0, ..., c_N]`` with
``fn(a0 + t) = sum c_k t**k + O(t**(N+1))``.  Values at ``a0`` come from the
backend, so the exact backend refuses irrational ones.
"""

from __future__ import annotations

from .errors import DomainError

FUNCTIONS = ("exp", "log", "sin", "cos", "arcsin", "arcsinh", "sqrt")


def _power_series(h: list, alpha, g0, n_terms: int, backend) -> list:
    """Coefficients of ``h(t)**alpha`` given ``g0 = h[0]**alpha``.

    Uses the classical recurrence obtained from ``h * g' = alpha * h' * g``.
    """
    g = [g0]
    h0 = h[0]
    for n in range(1, n_terms):
        acc = backend.zero
        for k in range(1, min(n, len(h) - 1) + 1):
            if h[k]:
                acc += ((alpha + 1) * k - n) * h[k] * g[n - k]
        g.append(acc / (n * h0))
    return g


def _inverse_trig(a0, order: int, backend, sign: int) -> list:
    # derivative is (1 + sign*x^2)^(-1/2); expand h = 1 + sign*(a0 + t)^2
    h0 = 1 + sign * a0 * a0
    if h0 <= 0:
        raise DomainError(f"arcsin is not analytic at {a0}")
    h = [h0, 2 * sign * a0, backend.scalar(sign)]
    half = backend.scalar("1/2")
    g0 = 1 / backend.sqrt(h0)
    deriv = _power_series(h, -half, g0, order, backend)
    value = backend.asin(a0) if sign < 0 else backend.asinh(a0)
    return [value] + [deriv[k - 1] / k for k in range(1, order + 1)]


def taylor_coefficients(fn: str, a0, order: int, backend) -> list:
    one = backend.one
    if fn == "exp":
        e = backend.exp(a0)
        out = [e]
        for k in range(1, order + 1):
            out.append(out[-1] / k)
        return out
    if fn == "log":
        val = backend.log(a0)
        out = [val]
        inv = one / a0
        p = one
        for k in range(1, order + 1):
            p = p * inv
            out.append(p / k if k % 2 else -p / k)
        return out
    if fn in ("sin", "cos"):
        s, c = backend.sin(a0), backend.cos(a0)
        cycle = [s, c, -s, -c] if fn == "sin" else [c, -s, -c, s]
        out = []
        fact = one
        for k in range(order + 1):
            if k:
                fact = fact * k
            out.append(cycle[k % 4] / fact)
        return out
    if fn == "sqrt":
        r = backend.sqrt(a0)
        out = [r]
        half = backend.scalar("1/2")
        binom = one
        inv = one / a0
        for k in range(1, order + 1):
            binom = binom * (half - (k - 1)) / k
            out.append(r * binom * inv**k)
        return out
    if fn == "arcsin":
        return _inverse_trig(a0, order, backend, -1)
    if fn == "arcsinh":
        return _inverse_trig(a0, order, backend, +1)
    raise ValueError(f"unknown function {fn!r}")
