"""Truncated power series in one complex variable (ascending coefficients)."""
from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial


def shift(c, x: complex) -> np.ndarray:
    """Coefficients of p(x + h) as a polynomial in h."""
    return np.asarray(Polynomial(np.asarray(c, dtype=complex))(Polynomial([x, 1.0])).coef, dtype=complex)


def pad(a, m: int) -> np.ndarray:
    out = np.zeros(m, dtype=complex)
    a = np.asarray(a, dtype=complex)[:m]
    out[: a.size] = a
    return out


def mul(a, b, m: int) -> np.ndarray:
    return pad(np.convolve(pad(a, m), pad(b, m)), m)


def div(a, b, m: int) -> np.ndarray:
    """a/b truncated to m terms; requires b[0] != 0."""
    a, b = pad(a, m), pad(b, m)
    if b[0] == 0:
        raise ZeroDivisionError("series denominator vanishes at 0")
    q = np.zeros(m, dtype=complex)
    for k in range(m):
        q[k] = (a[k] - np.dot(q[:k], b[k:0:-1])) / b[0]
    return q


def compose(outer, inner, m: int) -> np.ndarray:
    """outer(inner(h)) truncated to m terms; inner must have zero constant term."""
    outer, inner = pad(outer, m), pad(inner, m)
    res = np.zeros(m, dtype=complex)
    for a in outer[::-1]:
        res = mul(res, inner, m)
        res[0] += a
    return res


def inverse_reciprocal(a, m: int) -> np.ndarray:
    """1/a truncated to m terms."""
    one = np.zeros(m, dtype=complex)
    one[0] = 1.0
    return div(one, a, m)
