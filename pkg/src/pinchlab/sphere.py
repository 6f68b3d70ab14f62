"""Riemann-sphere arithmetic: chart-safe points, rational maps, chordal metric.

Polynomials are stored as ascending coefficient arrays (``c[k]`` multiplies
``z**k``).  Points near infinity are kept in the ``1/z`` chart so that no
arithmetic ever leaves the range ``|z| <= 1e8``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ChartError, InvalidMap, RootFindingFailure

CROSSOVER = 1e8
COPRIME_TOL = 1e-12
_TRIM_REL = 1e-14


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point of C ∪ {∞}.

    ``chart == "finite"`` stores z itself; ``chart == "infinity"`` stores
    u = 1/z, so ``SpherePoint(0, "infinity")`` is ∞.
    """

    value: complex
    chart: str = "finite"

    def __post_init__(self):
        v = complex(self.value)
        if self.chart not in ("finite", "infinity"):
            raise ChartError(f"unknown chart {self.chart!r}")
        if not np.isfinite(v):
            raise ChartError("chart value must be finite")
        # re-chart anything outside the allowed range
        if self.chart == "finite" and abs(v) > CROSSOVER:
            object.__setattr__(self, "chart", "infinity")
            v = 1.0 / v
        elif self.chart == "infinity" and abs(v) > 1.0:
            object.__setattr__(self, "chart", "finite")
            v = 1.0 / v
        object.__setattr__(self, "value", v)

    @classmethod
    def from_complex(cls, z) -> "SpherePoint":
        z = complex(z)
        if not np.isfinite(z):
            return cls(0j, "infinity")
        if abs(z) > CROSSOVER:
            return cls(1.0 / z, "infinity")
        return cls(z, "finite")

    @classmethod
    def from_homogeneous(cls, a, b) -> "SpherePoint":
        """The point [a : b], i.e. a/b."""
        a, b = complex(a), complex(b)
        if a == 0 and b == 0:
            raise ChartError("[0:0] is not a point")
        if abs(a) <= CROSSOVER * abs(b):
            return cls(a / b, "finite")
        return cls(b / a, "infinity")

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(0j, "infinity")

    @property
    def is_infinity(self) -> bool:
        return self.chart == "infinity" and self.value == 0

    def homogeneous(self) -> tuple[complex, complex]:
        if self.chart == "finite":
            return self.value, 1.0 + 0j
        return 1.0 + 0j, self.value

    def to_complex(self) -> complex:
        """Plain complex value; ∞ becomes ``complex(inf, 0)``."""
        if self.chart == "finite":
            return self.value
        if self.value == 0:
            return complex(np.inf, 0.0)
        return 1.0 / self.value

    def __eq__(self, other):
        if not isinstance(other, SpherePoint):
            return NotImplemented
        return chordal_distance(self, other) == 0.0

    def __hash__(self):
        z = self.to_complex()
        if not np.isfinite(z):
            return hash("inf")
        return hash(z)

    def __repr__(self):
        if self.is_infinity:
            return "SpherePoint(∞)"
        if self.chart == "finite":
            return f"SpherePoint({self.value!r})"
        return f"SpherePoint(1/{self.value!r})"


def as_point(z) -> SpherePoint:
    return z if isinstance(z, SpherePoint) else SpherePoint.from_complex(z)


def _homog_arrays(z):
    """Split a complex array (inf allowed) into well-scaled homogeneous pairs."""
    z = np.asarray(z, dtype=complex)
    a = np.ones_like(z)
    b = np.ones_like(z)
    big = ~np.isfinite(z) | (np.abs(z) > 1.0)
    small = ~big
    a[small] = z[small]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(np.isfinite(z), 1.0 / np.where(big, z, 1.0), 0.0)
    b[big] = inv[big]
    return a, b


def chordal(z, w):
    """Vectorised chordal distance on complex arrays (``inf`` is ∞)."""
    a, b = _homog_arrays(z)
    c, d = _homog_arrays(w)
    num = 2.0 * np.abs(a * d - b * c)
    den = np.sqrt((np.abs(a) ** 2 + np.abs(b) ** 2) * (np.abs(c) ** 2 + np.abs(d) ** 2))
    return np.minimum(num / den, 2.0)


def chordal_distance(p, q) -> float:
    """Chordal distance 2|p-q|/sqrt((1+|p|^2)(1+|q|^2)), in [0, 2]."""
    a, b = as_point(p).homogeneous()
    c, d = as_point(q).homogeneous()
    num = 2.0 * abs(a * d - b * c)
    den = np.sqrt((abs(a) ** 2 + abs(b) ** 2) * (abs(c) ** 2 + abs(d) ** 2))
    return float(min(num / den, 2.0))


def stereographic(z):
    """Inverse stereographic projection of complex array onto the unit sphere."""
    a, b = _homog_arrays(z)
    n = np.abs(a) ** 2 + np.abs(b) ** 2
    ab = a * np.conj(b)
    return np.stack([2 * ab.real / n, 2 * ab.imag / n, (np.abs(a) ** 2 - np.abs(b) ** 2) / n], axis=-1)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def trim(c, rel: float = _TRIM_REL) -> np.ndarray:
    """Drop negligible trailing (top-degree) coefficients."""
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0:
        return np.zeros(1, dtype=complex)
    k = c.size
    while k > 1 and abs(c[k - 1]) <= rel * scale:
        k -= 1
    return c[:k].copy()


def degree(c) -> int:
    c = trim(c)
    if c.size == 1 and c[0] == 0:
        return -1
    return c.size - 1


def _newton_polish(c, roots, iters=60):
    dc = P.polyder(c)
    out = np.array(roots, dtype=complex)
    for i in range(out.size):
        z = out[i]
        fz = P.polyval(z, c)
        for _ in range(iters):
            d = P.polyval(z, dc)
            if d == 0:
                break
            step = fz / d
            zn = z - step
            fn = P.polyval(zn, c)
            if not abs(fn) < abs(fz):
                break
            z, fz = zn, fn
            if abs(step) <= 1e-16 * max(1.0, abs(z)):
                break
        out[i] = z
    return out


def relative_residual(c, z) -> np.ndarray:
    """|p(z)| / sum |c_k||z|^k, a scale-free backward error."""
    z = np.asarray(z, dtype=complex)
    num = np.abs(P.polyval(z, c))
    den = P.polyval(np.abs(z), np.abs(c))
    return num / np.where(den > 0, den, 1.0)


def poly_roots(c, polish: bool = True, tol: float = 1e-10) -> np.ndarray:
    """All roots of an ascending-coefficient polynomial.

    Companion-matrix eigenvalues (LAPACK, balanced) followed by Newton
    polishing.  Raises RootFindingFailure if any polished root keeps a
    relative residual above ``tol``.
    """
    c = trim(c)
    n = c.size - 1
    if n <= 0:
        return np.zeros(0, dtype=complex)
    # strip roots at zero exactly
    nz = 0
    while nz < n and c[nz] == 0:
        nz += 1
    core = c[nz:]
    m = core.size - 1
    if m > 0:
        comp = np.zeros((m, m), dtype=complex)
        comp[1:, :-1] = np.eye(m - 1)
        comp[:, -1] = -core[:-1] / core[-1]
        r = np.linalg.eigvals(comp)
        if polish:
            r = _newton_polish(core, r)
        if not np.all(np.isfinite(r)):
            raise RootFindingFailure("non-finite root from companion matrix")
        res = relative_residual(core, r)
        if np.any(res > tol):
            raise RootFindingFailure(f"root residual {res.max():.3g} exceeds {tol:g}")
    else:
        r = np.zeros(0, dtype=complex)
    return np.concatenate([np.zeros(nz, dtype=complex), r])


# ---------------------------------------------------------------------------
# rational maps
# ---------------------------------------------------------------------------

def _as_coeffs(c) -> tuple:
    return tuple(complex(x) for x in np.atleast_1d(np.asarray(c, dtype=complex)))


@dataclass(frozen=True)
class RationalMap:
    """f = num/den with ascending coefficient tuples.

    On construction both vectors are trimmed and divided by the larger of the
    two degree-d coefficients, so that coefficient has modulus 1.  The pair
    must be coprime (resultant magnitude above 1e-12).
    """

    num: tuple
    den: tuple

    def __post_init__(self):
        n = trim(self.num)
        d = trim(self.den)
        if not np.all(np.isfinite(n)) or not np.all(np.isfinite(d)):
            raise InvalidMap("coefficients must be finite")
        dn, dd = degree(n), degree(d)
        if dd < 0:
            raise InvalidMap("denominator is identically zero")
        deg = max(dn, dd)
        if deg < 1:
            raise InvalidMap("map has degree 0")
        top_n = n[deg] if dn == deg else 0j
        top_d = d[deg] if dd == deg else 0j
        s = top_n if abs(top_n) >= abs(top_d) else top_d
        n, d = n / s, d / s
        if dn >= 0 and _resultant_magnitude(n, d) <= COPRIME_TOL:
            raise InvalidMap("numerator and denominator share a root")
        object.__setattr__(self, "num", _as_coeffs(n))
        object.__setattr__(self, "den", _as_coeffs(d))

    # -- constructors -------------------------------------------------------
    @classmethod
    def polynomial(cls, coeffs) -> "RationalMap":
        return cls(coeffs, (1.0,))

    @classmethod
    def quadratic(cls, c) -> "RationalMap":
        return cls((c, 0.0, 1.0), (1.0,))

    @classmethod
    def mobius(cls, a, b, c, d) -> "RationalMap":
        """z -> (a z + b)/(c z + d)."""
        if abs(a * d - b * c) <= COPRIME_TOL:
            raise InvalidMap("singular Möbius matrix")
        return cls((b, a), (d, c))

    # -- basic data ---------------------------------------------------------
    @property
    def N(self) -> np.ndarray:
        return np.array(self.num, dtype=complex)

    @property
    def D(self) -> np.ndarray:
        return np.array(self.den, dtype=complex)

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    @property
    def is_polynomial(self) -> bool:
        return len(self.den) == 1

    def _rev(self):
        """Coefficients of z^-d N(z), z^-d D(z) as polynomials in u = 1/z."""
        d = self.degree
        rn = np.zeros(d + 1, dtype=complex)
        rd = np.zeros(d + 1, dtype=complex)
        rn[d - len(self.num) + 1:] = self.N[::-1]
        rd[d - len(self.den) + 1:] = self.D[::-1]
        return rn, rd

    # -- evaluation ---------------------------------------------------------
    def homogeneous(self, z):
        """Homogeneous image pair (n, d) for complex array z (``inf`` allowed)."""
        z = np.asarray(z, dtype=complex)
        n = np.empty_like(z)
        d = np.empty_like(z)
        inner = np.isfinite(z) & (np.abs(z) <= 1.0)
        n[inner] = P.polyval(z[inner], self.N)
        d[inner] = P.polyval(z[inner], self.D)
        outer = ~inner
        if np.any(outer):
            zo = z[outer]
            with np.errstate(divide="ignore"):
                u = np.where(np.isfinite(zo), 1.0 / np.where(np.isfinite(zo), zo, 1.0), 0.0)
            rn, rd = self._rev()
            n[outer] = P.polyval(u, rn)
            d[outer] = P.polyval(u, rd)
        return n, d

    def evaluate(self, z):
        """Vectorised f on complex arrays; ∞ is represented by ``inf``."""
        n, d = self.homogeneous(z)
        out = np.full(n.shape, complex(np.inf, 0.0))
        ok = d != 0
        out[ok] = n[ok] / d[ok]
        return out

    def __call__(self, z):
        return eval_map(self, as_point(z))

    def step(self, z: complex) -> complex:
        """Fast scalar f(z) on Python complex numbers; ∞ is ``complex('inf')``."""
        if z != z or abs(z) > 1.0:
            u = 0j if (z != z or abs(z) == np.inf) else 1.0 / z
            d = self.degree
            n = 0j
            for a in self.num:  # reversed Horner: sum a_k u^{d-k}
                n = n * u + a
            n *= u ** (d - len(self.num) + 1)
            m = 0j
            for a in self.den:
                m = m * u + a
            m *= u ** (d - len(self.den) + 1)
        else:
            n = 0j
            for a in reversed(self.num):
                n = n * z + a
            m = 0j
            for a in reversed(self.den):
                m = m * z + a
        if m == 0:
            return complex(np.inf, 0.0)
        return n / m

    def derivative_complex(self, z):
        """f'(z) for finite complex arrays (no chart handling)."""
        z = np.asarray(z, dtype=complex)
        N, D = self.N, self.D
        n, d = P.polyval(z, N), P.polyval(z, D)
        dn, dd = P.polyval(z, P.polyder(N)), P.polyval(z, P.polyder(D))
        return (dn * d - n * dd) / (d * d)

    def chart_derivative(self, p: SpherePoint) -> complex:
        """Derivative of f read in the canonical charts of p and f(p).

        The chart at a point is z if it is finite and 1/z if it is ∞.  The
        product of these along a cycle is the cycle's multiplier.
        """
        p = as_point(p)
        src_inf = p.is_infinity
        img = eval_map(self, p)
        dst_inf = img.is_infinity
        if not src_inf and not dst_inf:
            return complex(self.derivative_complex(p.to_complex()))
        # local map in the chosen charts, differentiated by quotient rule
        if src_inf:
            rn, rd = self._rev()          # f(1/u) = rn(u)/rd(u)
            a, b, x = rn, rd, 0j
        else:
            a, b, x = self.N, self.D, p.to_complex()
        if dst_inf:
            a, b = b, a                   # 1/f
        fa, fb = P.polyval(x, a), P.polyval(x, b)
        da, db = P.polyval(x, P.polyder(a)), P.polyval(x, P.polyder(b))
        return complex((da * fb - fa * db) / (fb * fb))

    # -- algebra ------------------------------------------------------------
    def compose(self, other: "RationalMap") -> "RationalMap":
        """self ∘ other."""
        d = self.degree
        gn, gd = other.N, other.D
        pow_n = [np.array([1.0 + 0j])]
        pow_d = [np.array([1.0 + 0j])]
        for _ in range(d):
            pow_n.append(P.polymul(pow_n[-1], gn))
            pow_d.append(P.polymul(pow_d[-1], gd))
        num = np.zeros(1, dtype=complex)
        den = np.zeros(1, dtype=complex)
        for k, a in enumerate(self.num):
            if a != 0:
                num = P.polyadd(num, a * P.polymul(pow_n[k], pow_d[d - k]))
        for k, a in enumerate(self.den):
            if a != 0:
                den = P.polyadd(den, a * P.polymul(pow_n[k], pow_d[d - k]))
        return RationalMap(num, den)

    def iterate_map(self, n: int) -> "RationalMap":
        g = self
        for _ in range(n - 1):
            g = self.compose(g)
        return g

    def inversion_conjugate(self) -> "RationalMap":
        """The map u -> 1/f(1/u)."""
        rn, rd = self._rev()
        return RationalMap(rd, rn)

    def wronskian(self) -> np.ndarray:
        N, D = self.N, self.D
        return trim(P.polysub(P.polymul(P.polyder(N), D), P.polymul(N, P.polyder(D))))

    # -- serialisation -------------------------------------------------------
    def to_dict(self) -> dict:
        return {"num": [[c.real, c.imag] for c in self.num],
                "den": [[c.real, c.imag] for c in self.den]}

    @classmethod
    def from_dict(cls, d: dict) -> "RationalMap":
        def conv(v):
            out = []
            for x in v:
                if isinstance(x, (list, tuple)):
                    out.append(complex(float(x[0]), float(x[1])))
                else:
                    out.append(complex(x))
            return out
        try:
            return cls(conv(d["num"]), conv(d["den"]))
        except (KeyError, TypeError, IndexError, ValueError) as e:
            if isinstance(e, InvalidMap):
                raise
            raise InvalidMap(f"bad map record: {e}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "RationalMap":
        return cls.from_dict(json.loads(s))


def _resultant_magnitude(n, d) -> float:
    """|Res(N, D)| via roots of the higher-degree-ready factor."""
    n, d = trim(n), trim(d)
    dn, dd = degree(n), degree(d)
    if dn <= 0 or dd <= 0:
        # a constant factor: resultant is a power of it (nonzero unless 0)
        const = n[0] if dn <= 0 else d[0]
        other_deg = dd if dn <= 0 else dn
        return abs(const) ** max(other_deg, 1)
    try:
        roots = poly_roots(n, tol=1e-6)
    except RootFindingFailure:
        roots = np.roots(n[::-1])
    vals = P.polyval(roots, d)
    return float(abs(n[-1]) ** dd * np.prod(np.abs(vals)))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def eval_map(f: RationalMap, z) -> SpherePoint:
    """f(z) with automatic chart switching."""
    p = as_point(z)
    if p.chart == "finite" and abs(p.value) <= 1.0:
        n = P.polyval(p.value, f.N)
        d = P.polyval(p.value, f.D)
    else:
        u = 1.0 / p.value if p.chart == "finite" else p.value
        rn, rd = f._rev()
        n = P.polyval(u, rn)
        d = P.polyval(u, rd)
    return SpherePoint.from_homogeneous(n, d)


def derivative(f: RationalMap, z) -> complex:
    """f'(z) in the finite chart."""
    p = as_point(z)
    if p.is_infinity or p.chart == "infinity":
        raise ChartError("finite-chart derivative requested at or near ∞; conjugate by 1/z")
    if abs(P.polyval(p.value, f.D)) == 0:
        raise ChartError("z is a pole of f")
    return complex(f.derivative_complex(p.value))


def critical_points(f: RationalMap) -> list[SpherePoint]:
    """All 2d-2 critical points with multiplicity (roots of N'D - ND')."""
    d = f.degree
    if d < 2:
        raise InvalidMap("critical points need degree >= 2")
    W = f.wronskian()
    dw = degree(W)
    pts: list[SpherePoint] = []
    if dw > 0:
        roots = poly_roots(W, tol=1e-10)
        pts.extend(SpherePoint.from_complex(r) for r in roots)
    n_inf = 2 * d - 2 - max(dw, 0)
    pts.extend(SpherePoint.infinity() for _ in range(n_inf))
    return pts


def iterate(f: RationalMap, n: int, z) -> SpherePoint:
    if n < 0:
        raise ValueError("n must be >= 0")
    p = as_point(z)
    for _ in range(n):
        p = eval_map(f, p)
    return p


def match_multisets(a: Sequence[SpherePoint], b: Sequence[SpherePoint]) -> float:
    """Worst chordal distance under the best matching of two point lists."""
    from scipy.optimize import linear_sum_assignment
    if len(a) != len(b):
        return np.inf
    if not a:
        return 0.0
    za = np.array([p.to_complex() for p in a])
    zb = np.array([p.to_complex() for p in b])
    cost = chordal(za[:, None], zb[None, :])
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max())


def random_map(rng: np.random.Generator, d: int, polynomial: bool = False) -> RationalMap:
    """A random degree-d map (used by property tests and demos)."""
    while True:
        num = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        den = [1.0] if polynomial else rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        try:
            return RationalMap(num, den)
        except InvalidMap:
            continue


def points(values: Iterable) -> list[SpherePoint]:
    return [as_point(v) for v in values]
