"""Attracting petals and Fatou coordinates at a parabolic fixed point.

Everything is done in the shifted coordinate h = z - y, where the map reads
h -> h + c h^2 + b h^3 + ... with no constant term, and in the inverted
coordinate w = -1/(c h), where it reads w -> w + 1 + A/w + O(w^-2).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from . import series
from .dynamics import PeriodicPoint
from .errors import InvarianceFailure, NotParabolic, OutsidePetal, SlowConvergence
from .sphere import RationalMap, SpherePoint, as_point, trim

N_BOUNDARY = 256
ASYMPTOTIC_TERMS = 4
STOP_INCREMENT = 1e-11
SLOW_INCREMENT = 1e-9


@dataclass(frozen=True)
class Petal:
    base_point: SpherePoint
    direction: complex
    scale: float
    sample: tuple
    c: complex = 0j
    b: complex = 0j
    shifted_num: tuple = field(default=(), repr=False)
    shifted_den: tuple = field(default=(), repr=False)

    @property
    def y(self) -> complex:
        return self.base_point.to_complex()

    @property
    def center(self) -> complex:
        return self.y - self.scale / (2 * self.c)

    @property
    def radius(self) -> float:
        return self.scale / (2 * abs(self.c))

    def contains(self, z, slack: float = 0.0) -> bool:
        z = as_point(z).to_complex()
        return bool(np.isfinite(z) and abs(z - self.center) < self.radius * (1 + slack))

    def to_w(self, z: complex) -> complex:
        return -1.0 / (self.c * (z - self.y))

    def from_w(self, w: complex) -> complex:
        return self.y - 1.0 / (self.c * w)


def _shifted(f: RationalMap, y: complex):
    """Numerator/denominator of h -> f(y + h) - y."""
    Nh = series.shift(f.N, y)
    Dh = series.shift(f.D, y)
    Nh = P.polysub(Nh, y * Dh)
    Nh[0] = 0.0          # exact fixed point in the shifted chart
    return trim(Nh), trim(Dh)


def _step(num: np.ndarray, den: np.ndarray, h):
    return P.polyval(h, num) / P.polyval(h, den)


def _taylor(num, den, m: int) -> np.ndarray:
    return series.div(num, den, m)


def build_petal(f: RationalMap, pp: PeriodicPoint, scale: float) -> Petal:
    """Tangent-disk attracting petal of radius scale/(2|c|) at a parabolic fixed point.

    Only multiplier exactly 1 with multiplicity 2 (one attracting direction)
    is handled; for p/q rotation pass the iterate f^(pq).
    """
    if pp.classification != "parabolic":
        raise NotParabolic(f"point is {pp.classification}, not parabolic")
    if pp.period != 1 or pp.rotation is None or pp.rotation.denominator != 1:
        raise NotParabolic("petal needs multiplier 1 at a fixed point; pass the iterate f^(pq)")
    if pp.multiplicity != 2:
        raise NotParabolic(f"multiplicity {pp.multiplicity} not supported (only 2)")
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    y = pp.location.to_complex()
    if not np.isfinite(y):
        raise NotParabolic("parabolic point at infinity: conjugate by 1/z first")
    num, den = _shifted(f, y)
    t = _taylor(num, den, 4)
    c, b = complex(t[2]), complex(t[3])
    if abs(c) < 1e-10:
        raise NotParabolic("quadratic coefficient vanishes")
    direction = -np.conj(c) / abs(c)
    ctr = y - scale / (2 * c)
    rad = scale / (2 * abs(c))
    ang = 2 * np.pi * (np.arange(N_BOUNDARY) + 0.5) / N_BOUNDARY
    pts = ctr + rad * np.exp(1j * ang)
    petal = Petal(SpherePoint.from_complex(y), complex(direction), float(scale),
                  tuple(SpherePoint.from_complex(p) for p in pts), c, b,
                  tuple(complex(x) for x in num), tuple(complex(x) for x in den))
    bad = invariance_violations(f, petal)
    if bad:
        raise InvarianceFailure(f"{bad} boundary samples leave the petal; shrink the scale")
    return petal


def invariance_violations(f: RationalMap, petal: Petal, tol: float = 1e-8,
                          iterations: int = 10_000, converge_tol: float = 1e-3) -> int:
    """Number of boundary samples failing f(s) ∈ petal ∪ {y} or orbit convergence."""
    num, den = np.array(petal.shifted_num), np.array(petal.shifted_den)
    y = petal.y
    h = np.array([s.to_complex() for s in petal.sample]) - y
    h1 = _step(num, den, h)
    z1 = y + h1
    inside = np.abs(z1 - petal.center) < petal.radius
    near = np.abs(h1) < tol
    bad = ~(inside | near)
    hn = h1.copy()
    for _ in range(iterations - 1):
        hn = _step(num, den, hn)
    bad |= ~(np.abs(hn) < converge_tol)
    return int(bad.sum())


def _asymptotic_data(num, den, c: complex, J: int = ASYMPTOTIC_TERMS):
    """A and the correction coefficients d_1..d_J of the Fatou expansion.

    In u = 1/w the map is w -> w T(u) with T = 1/(1 + S(u)),
    S(u) = sum_k a_{k+1} (-u/c)^k.  Φ(w) = w - A log w + sum d_j w^-j solves
    Φ(F(w)) = Φ(w) + 1 order by order.
    """
    m = J + 3
    a = _taylor(num, den, m + 1)
    S = np.zeros(m, dtype=complex)
    for k in range(1, m):
        S[k] = a[k + 1] * (-1.0 / c) ** k
    one_plus = S.copy()
    one_plus[0] += 1.0
    T = series.inverse_reciprocal(one_plus, m)
    A = T[2]
    # log T via integral of T'/T
    dT = np.zeros(m, dtype=complex)
    dT[: m - 1] = T[1:] * np.arange(1, m)
    q = series.div(dT, T, m)
    logT = np.zeros(m, dtype=complex)
    logT[1:] = q[: m - 1] / np.arange(1, m)
    E = T.copy()                       # F(w) - w - 1 = sum_{k>=1} T_{k+1} u^k
    E = np.concatenate([E[1:], [0]])
    E[0] = 0.0
    E = E - A * logT
    d = np.zeros(J + 1, dtype=complex)
    Tinv = [None]
    for j in range(1, J + 1):
        Tj = series.inverse_reciprocal(T, m)
        for _ in range(j - 1):
            Tj = series.mul(Tj, series.inverse_reciprocal(T, m), m)
        Tinv.append(Tj)
    for mm in range(1, J + 1):
        acc = E.copy()
        for j in range(1, mm):
            term = Tinv[j].copy()
            term[0] -= 1.0
            acc = acc + d[j] * np.concatenate([np.zeros(j), term])[:m]
        d[mm] = acc[mm + 1] / mm
    return complex(A), d[1:]


def fatou_coordinate(f: RationalMap, petal: Petal, z, n_terms: int = 1_000_000) -> complex:
    """Attracting Fatou coordinate Φ at z, normalised by its asymptotic expansion.

    Φ_N = w_N - N - A log w_N + Σ d_j w_N^-j with w_N = -1/(c (f^N(z) - y)).
    The loop stops once successive Φ_N differ by less than 1e-11, or at
    ``n_terms`` iterates.
    """
    zc = as_point(z).to_complex()
    if not petal.contains(zc):
        raise OutsidePetal(f"{zc} is not in the petal")
    num, den = np.array(petal.shifted_num), np.array(petal.shifted_den)
    c = petal.c
    A, d = _fatou_cache(petal)
    h = complex(zc - petal.y)

    def phi(w, n):
        val = w - n - A * cmath.log(w)
        iw = 1.0 / w
        p = iw
        for dj in d:
            val += dj * p
            p *= iw
        return val

    prev = phi(-1.0 / (c * h), 0)
    inc = math.inf
    num_l = [complex(x) for x in num[::-1]]
    den_l = [complex(x) for x in den[::-1]]
    for n in range(1, int(n_terms) + 1):
        a = 0j
        for co in num_l:
            a = a * h + co
        b = 0j
        for co in den_l:
            b = b * h + co
        h = a / b
        cur = phi(-1.0 / (c * h), n)
        inc = abs(cur - prev)
        prev = cur
        if inc < STOP_INCREMENT:
            break
    if inc >= SLOW_INCREMENT:
        raise SlowConvergence(f"increment {inc:.3g} after {n_terms} iterates")
    return complex(prev)


_CACHE: dict = {}


def _fatou_cache(petal: Petal):
    key = (petal.shifted_num, petal.shifted_den, petal.c)
    if key not in _CACHE:
        _CACHE[key] = _asymptotic_data(np.array(petal.shifted_num), np.array(petal.shifted_den), petal.c)
    return _CACHE[key]


def petal_samples(petal: Petal, count: int) -> np.ndarray:
    """Deterministic sample inside the petal, laid out in the w-plane.

    Re w in [1/σ + 0.5, 1/σ + 3], Im w in [-3, 3].
    """
    k = np.arange(count)
    g = (math.sqrt(5) - 1) / 2
    re = 1.0 / petal.scale + 0.5 + 2.5 * ((k + 0.5) / count)
    im = -3.0 + 6.0 * ((k * g) % 1.0)
    w = re + 1j * im
    return petal.y - 1.0 / (petal.c * w)


def abel_residual(f: RationalMap, petal: Petal, sample_count: int = 100, n_terms: int = 1_000_000) -> float:
    """max |Φ(f(z)) - Φ(z) - 1| over a deterministic petal sample."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    num, den = np.array(petal.shifted_num), np.array(petal.shifted_den)
    worst = 0.0
    for z in petal_samples(petal, sample_count):
        fz = petal.y + _step(num, den, z - petal.y)
        r = abs(fatou_coordinate(f, petal, fz, n_terms) - fatou_coordinate(f, petal, z, n_terms) - 1.0)
        worst = max(worst, r)
    return worst


def fatou_table(f: RationalMap, petal: Petal, count: int, n_terms: int = 1_000_000) -> list[tuple[complex, complex]]:
    return [(complex(z), fatou_coordinate(f, petal, z, n_terms)) for z in petal_samples(petal, count)]
