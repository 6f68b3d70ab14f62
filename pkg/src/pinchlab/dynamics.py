"""Periodic points, multipliers, parabolic data, critical orbits, shrinking probe."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from . import series
from .errors import DepthTooLarge, NotPeriodic, PeriodTooLarge, RootFindingFailure, UnresolvedIndifferent
from .sphere import (RationalMap, SpherePoint, as_point, chordal, chordal_distance, eval_map, poly_roots,
                     stereographic, trim)

SUPERATTRACTING_TOL = 1e-10
INDIFFERENT_TOL = 1e-6
MAX_Q = 64
MAX_PERIOD = 8
MAX_ROOT_DEGREE = 64
CLUSTER_TOL = 1e-5
PERIOD_TOL = 1e-8

CLASSES = ("superattracting", "attracting", "repelling", "parabolic", "irrationally_indifferent")


@dataclass(frozen=True)
class PeriodicPoint:
    location: SpherePoint
    period: int
    multiplier: complex
    classification: str
    rotation: Optional[Fraction] = None
    multiplicity: Optional[int] = None
    leading_coefficient: Optional[complex] = None
    root_multiplicity: int = 1

    @property
    def z(self) -> complex:
        return self.location.to_complex()

    def csv_row(self) -> list[str]:
        z = self.z
        lam = self.multiplier
        re, im = (("inf", "0") if not np.isfinite(z) else (f"{z.real:.17g}", f"{z.imag:.17g}"))
        return [re, im, str(self.period), f"{abs(lam):.17g}", f"{np.angle(lam):.17g}", self.classification]


# ---------------------------------------------------------------------------
# chart-local arithmetic
# ---------------------------------------------------------------------------
# A chart is "z" (coordinate z) or "u" (coordinate 1/z); the canonical chart of
# a point is "z" when |z| <= 1.

def _chart_of(z: complex) -> str:
    return "z" if (np.isfinite(z) and abs(z) <= 1.0) else "u"


def _to_chart(z: complex, chart: str) -> complex:
    if chart == "z":
        return z
    return 0j if not np.isfinite(z) else 1.0 / z


def _from_chart(x: complex, chart: str) -> complex:
    if chart == "z":
        return x
    return complex(np.inf, 0) if x == 0 else 1.0 / x


def _polys(f: RationalMap, src: str, dst: str):
    if src == "z":
        A, B = f.N, f.D
    else:
        A, B = f._rev()
    if dst == "u":
        A, B = B, A
    return A, B


def _local(f: RationalMap, x: complex, src: str, dst: str):
    """Value and derivative of f read from chart ``src`` to chart ``dst``."""
    A, B = _polys(f, src, dst)
    a, b = P.polyval(x, A), P.polyval(x, B)
    da, db = P.polyval(x, P.polyder(A)), P.polyval(x, P.polyder(B))
    return a / b, (da * b - a * db) / (b * b)


def _image_chart(f: RationalMap, x: complex, src: str) -> str:
    A, B = _polys(f, src, "z")
    a, b = P.polyval(x, A), P.polyval(x, B)
    return "z" if abs(a) <= abs(b) else "u"


def orbit_in_charts(f: RationalMap, x: complex, chart: str, p: int):
    """f^p in the chart ``chart`` (start and end) with its derivative."""
    der = 1.0 + 0j
    cur, c = complex(x), chart
    for i in range(p):
        nxt = chart if i == p - 1 else _image_chart(f, cur, c)
        with np.errstate(all="ignore"):
            cur, d = _local(f, cur, c, nxt)
        der *= d
        c = nxt
    return complex(cur), complex(der)


def _cycle_series(f: RationalMap, x: complex, chart: str, steps: int, m: int) -> np.ndarray:
    """Taylor coefficients (m terms) of f^steps at x, read in ``chart`` both ends."""
    total = np.zeros(m, dtype=complex)
    total[1] = 1.0
    cur, c = complex(x), chart
    for i in range(steps):
        nxt = chart if i == steps - 1 else _image_chart(f, cur, c)
        A, B = _polys(f, c, nxt)
        a = series.shift(A, cur)
        b = series.shift(B, cur)
        loc = series.div(a, b, m)
        loc[0] = 0.0
        total = series.compose(loc, total, m)
        cur = P.polyval(cur, A) / P.polyval(cur, B)
        c = nxt
    return total


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def multiplier(f: RationalMap, point, period: int) -> complex:
    z = as_point(point).to_complex()
    ch = _chart_of(z)
    return orbit_in_charts(f, _to_chart(z, ch), ch, period)[1]


def _rotation(lam: complex) -> Optional[Fraction]:
    frac = (np.angle(lam) / (2 * np.pi)) % 1.0
    r = Fraction(frac).limit_denominator(MAX_Q)
    if r == 0:
        r = Fraction(1, 1)
    if abs(lam - np.exp(2j * np.pi * float(r))) < INDIFFERENT_TOL:
        return r
    return None


def classify(f: RationalMap, point, period: int) -> PeriodicPoint:
    """Multiplier and dynamical class of a period-``period`` point."""
    if period < 1:
        raise ValueError("period must be positive")
    pt = as_point(point)
    z = pt.to_complex()
    ch = _chart_of(z)
    x = _to_chart(z, ch)
    val, lam = orbit_in_charts(f, x, ch, period)
    if chordal_distance(SpherePoint.from_complex(_from_chart(val, ch)), pt) > PERIOD_TOL:
        raise NotPeriodic(f"point is not {period}-periodic to 1e-8")
    a = abs(lam)
    if a < SUPERATTRACTING_TOL:
        return PeriodicPoint(pt, period, lam, "superattracting")
    if a < 1 - INDIFFERENT_TOL:
        return PeriodicPoint(pt, period, lam, "attracting")
    if a > 1 + INDIFFERENT_TOL:
        return PeriodicPoint(pt, period, lam, "repelling")
    rot = _rotation(lam)
    if rot is None:
        raise UnresolvedIndifferent(f"|λ|≈1 but no rotation p/q with q ≤ {MAX_Q} matches λ={lam}")
    q = rot.denominator
    m = 3 * q + 2
    coeffs = _cycle_series(f, x, ch, period * q, m)
    for j in range(2, m):
        cj = coeffs[j]
        if (j - 1) % q == 0:
            if abs(cj) > 1e-7:
                return PeriodicPoint(pt, period, lam, "parabolic", rotation=rot, multiplicity=j,
                                     leading_coefficient=complex(cj))
        elif abs(cj) > 1e-4:
            raise UnresolvedIndifferent(f"Taylor coefficient of order {j} inconsistent with rotation {rot}")
    raise UnresolvedIndifferent("no non-vanishing coefficient found: map is locally of finite order")


# ---------------------------------------------------------------------------
# periodic points
# ---------------------------------------------------------------------------

def _newton_cycle(f, z, p, mult, iters=60):
    """Modified Newton on f^p(x) - x in the canonical chart of z."""
    ch = _chart_of(z)
    x = _to_chart(z, ch)
    best_x, best_r = x, np.inf
    for _ in range(iters):
        val, der = orbit_in_charts(f, x, ch, p)
        g = val - x
        r = abs(g)
        if r < best_r:
            best_x, best_r = x, r
        if r == 0 or not np.isfinite(r):
            break
        dg = der - 1.0
        if dg == 0:
            break
        step = mult * g / dg
        x = x - step
        if abs(step) < 1e-17 * max(1.0, abs(x)):
            break
    x = best_x
    if mult > 1:
        # a root of multiplicity m is a simple root of the (m-1)-th Taylor
        # coefficient of f^p - id; Newton on that coefficient is well conditioned
        for _ in range(8):
            c = _cycle_series(f, x, ch, p, mult + 1)
            c[1] -= 1.0
            if c[mult] == 0:
                break
            step = c[mult - 1] / (mult * c[mult])
            x = x - step
            if abs(step) < 1e-17 * max(1.0, abs(x)):
                break
    return _from_chart(x, ch)


def _cluster(z: np.ndarray, tol: float):
    if z.size == 1:
        return [np.array([0])]
    xyz = stereographic(z)
    lab = fcluster(linkage(pdist(xyz), method="single"), t=tol, criterion="distance")
    return [np.flatnonzero(lab == k) for k in np.unique(lab)]


def _sphere_mean(z: np.ndarray) -> complex:
    if np.all(np.isfinite(z)) and np.max(np.abs(z)) <= 1.0:
        return complex(np.mean(z))
    if np.any(~np.isfinite(z)):
        return complex(np.inf, 0)
    u = np.mean(1.0 / z)
    return complex(np.inf, 0) if u == 0 else complex(1.0 / u)


def minimal_period(f: RationalMap, z: complex, p: int) -> int:
    for k in range(1, p + 1):
        if p % k:
            continue
        ch = _chart_of(z)
        val, _ = orbit_in_charts(f, _to_chart(z, ch), ch, k)
        if chordal(_from_chart(val, ch), z) < PERIOD_TOL:
            return k
    return p


def periodic_points(f: RationalMap, period: int) -> list[PeriodicPoint]:
    """All solutions of f^p(z) = z with their classification.

    Each distinct point appears once, with ``root_multiplicity`` recording its
    multiplicity as a root; the sum of multiplicities is d^p + 1.  ``period``
    of each entry is its exact (minimal) period.
    """
    d = f.degree
    if d < 2:
        raise ValueError("degree must be >= 2")
    if period < 1:
        raise ValueError("period must be positive")
    if period > MAX_PERIOD or d ** period > MAX_ROOT_DEGREE:
        raise PeriodTooLarge(f"d^p = {d}^{period} exceeds {MAX_ROOT_DEGREE} (or p > {MAX_PERIOD})")
    F = f.iterate_map(period)
    Q = trim(P.polysub(F.N, P.polymul([0.0, 1.0], F.D)))
    total = d ** period + 1
    roots = poly_roots(Q, polish=True, tol=1e-6) if Q.size > 1 else np.zeros(0, dtype=complex)
    n_inf = total - roots.size
    cand = np.concatenate([roots, np.full(n_inf, complex(np.inf, 0))])
    out: list[PeriodicPoint] = []
    for idx in _cluster(cand, CLUSTER_TOL):
        z0 = _sphere_mean(cand[idx])
        z = _newton_cycle(f, z0, period, len(idx))
        ch = _chart_of(z)
        val, _ = orbit_in_charts(f, _to_chart(z, ch), ch, period)
        if chordal(_from_chart(val, ch), z) > 1e-10:
            raise RootFindingFailure(f"periodic point {z} polished only to {chordal(_from_chart(val, ch), z):.3g}")
        k = minimal_period(f, z, period)
        try:
            pp = classify(f, SpherePoint.from_complex(z), k)
        except UnresolvedIndifferent:
            lam = multiplier(f, z, k)
            pp = PeriodicPoint(SpherePoint.from_complex(z), k, lam, "irrationally_indifferent")
        out.append(PeriodicPoint(pp.location, pp.period, pp.multiplier, pp.classification, pp.rotation,
                                 pp.multiplicity, pp.leading_coefficient, root_multiplicity=len(idx)))
    return out


def periodic_points_csv(points: list[PeriodicPoint]) -> str:
    lines = ["re,im,period,abs_lambda,arg_lambda,class"]
    lines += [",".join(p.csv_row()) for p in points]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# critical orbits
# ---------------------------------------------------------------------------

@dataclass
class OrbitReport:
    critical_point: SpherePoint
    orbit: np.ndarray
    escaped: bool
    limit_cycle: Optional[list] = None
    status: str = "unresolved"
    fit_exponent: Optional[float] = None
    note: str = ""

    @property
    def samples(self) -> list[SpherePoint]:
        return [SpherePoint.from_complex(z) for z in self.orbit]


def escape_radius(f: RationalMap) -> float:
    """R with |z| > R  =>  |f(z)| > 2|z| (polynomials only)."""
    a = np.abs(f.N / f.D[0])
    return float(max(4.0, (2.0 + a[:-1].sum()) / a[-1]))


def _match_cycle(f, z, p):
    """Periodic points of period dividing p nearest to z, or None."""
    d = f.degree
    if p > MAX_PERIOD or d ** p > MAX_ROOT_DEGREE:
        return None
    pts = periodic_points(f, p)
    locs = np.array([q.z for q in pts])
    dist = chordal(locs, z)
    i = int(np.argmin(dist))
    return pts[i], float(dist[i])


def _cycle_of(f, pp: PeriodicPoint) -> list[PeriodicPoint]:
    out = [pp]
    z = pp.location
    for _ in range(pp.period - 1):
        z = eval_map(f, z)
        out.append(PeriodicPoint(z, pp.period, pp.multiplier, pp.classification, pp.rotation,
                                 pp.multiplicity, pp.leading_coefficient))
    return out


def _fit_exponent(orbit: np.ndarray, target: complex) -> float:
    n_last = orbit.size - 1
    lo = max(1, n_last // 10)
    ns = np.unique(np.geomspace(lo, n_last, 50).astype(int))
    dist = chordal(orbit[ns], target)
    good = dist > 0
    slope = np.polyfit(np.log(ns[good]), np.log(dist[good]), 1)[0]
    return float(-slope)


def postcritical_orbit(f: RationalMap, max_iter: int = 100_000, tol: float = 1e-8) -> list[OrbitReport]:
    """Iterate each distinct critical point and describe where it goes."""
    if max_iter > 1_000_000:
        raise ValueError("max_iter must be <= 1e6")
    crit = []
    for c in _distinct(f):
        crit.append(c)
    poly = f.is_polynomial
    R = escape_radius(f) if poly else np.inf
    reports = []
    block = 256
    for c in crit:
        orbit = np.empty(max_iter + 1, dtype=complex)
        z = c.to_complex()
        orbit[0] = z
        n = 0
        rep = None
        parabolic_target = None
        while n < max_iter and rep is None:
            stop = min(max_iter, n + block)
            while n < stop:
                z = f.step(z)
                n += 1
                orbit[n] = z
                if poly and np.isfinite(z) and abs(z) > R:
                    break
            if poly and (not np.isfinite(z) or abs(z) > R) and np.isfinite(c.to_complex()):
                orbit = orbit[: n + 1]
                inf = SpherePoint.infinity()
                rep = OrbitReport(c, orbit, True, [classify(f, inf, 1)], "escaped",
                                  note="orbit escapes to the superattracting point at infinity")
                break
            if parabolic_target is not None:
                continue
            lag = min(64, n)
            prev = orbit[n - lag: n][::-1]
            dist = chordal(prev, z)
            hits = np.flatnonzero(dist < tol)
            if hits.size == 0:
                continue
            p = int(hits[0]) + 1
            m = _match_cycle(f, z, p)
            if m is None:
                rep = OrbitReport(c, orbit[: n + 1], False, None, "unresolved",
                                  note=f"orbit settles with apparent period {p}, too large to verify")
                break
            pp, dist_pp = m
            if pp.classification in ("attracting", "superattracting") and dist_pp < 1e-6:
                rep = OrbitReport(c, orbit[: n + 1], False, _cycle_of(f, pp), "attracting_cycle")
            elif pp.classification == "parabolic":
                parabolic_target = pp
            else:
                rep = OrbitReport(c, orbit[: n + 1], False, None, "unresolved",
                                  note=f"orbit near a {pp.classification} period-{pp.period} point")
        if rep is None:
            orbit = orbit[: n + 1]
            if parabolic_target is not None:
                expo = _fit_exponent(orbit, parabolic_target.z)
                ok = 0.8 <= expo <= 1.2
                rep = OrbitReport(c, orbit, False, _cycle_of(f, parabolic_target),
                                  "parabolic_cycle" if ok else "unresolved", fit_exponent=expo,
                                  note=f"distance to parabolic cycle ~ n^-{expo:.3f}")
            else:
                rep = OrbitReport(c, orbit, False, None, "unresolved", note="no cycle detected")
        reports.append(rep)
    return reports


def _distinct(f: RationalMap) -> list[SpherePoint]:
    from .sphere import critical_points
    pts = critical_points(f)
    out: list[SpherePoint] = []
    for p in pts:
        if all(chordal_distance(p, q) > 1e-8 for q in out):
            out.append(p)
    return out


def geometric_finiteness_summary(reports: list[OrbitReport]) -> str:
    if all(r.status in ("escaped", "attracting_cycle", "parabolic_cycle") for r in reports):
        return "consistent with geometrically finite"
    return "not resolved by this probe"


# ---------------------------------------------------------------------------
# shrinking probe
# ---------------------------------------------------------------------------

def _chordal_circle(center: complex, radius: float, m: int) -> np.ndarray:
    """m points on the chordal circle of given chordal radius about center."""
    P0 = stereographic(np.array([center]))[0]
    alpha = 2.0 * math.asin(min(radius / 2.0, 1.0))
    helper = np.array([1.0, 0.0, 0.0]) if abs(P0[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(P0, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(P0, e1)
    t = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
    X = (math.cos(alpha) * P0[None, :]
         + math.sin(alpha) * (np.cos(t)[:, None] * e1[None, :] + np.sin(t)[:, None] * e2[None, :]))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (X[:, 0] + 1j * X[:, 1]) / (1.0 - X[:, 2])
    z[~np.isfinite(z)] = complex(np.inf, 0)
    return z


def preimages(f: RationalMap, z: np.ndarray) -> np.ndarray:
    """All d preimages of each finite target: roots of N(w) - z D(w), shape (n, d)."""
    z = np.asarray(z, dtype=complex)
    d = f.degree
    N = np.zeros(d + 1, dtype=complex)
    D = np.zeros(d + 1, dtype=complex)
    N[: len(f.num)] = f.N
    D[: len(f.den)] = f.D
    coef = N[None, :] - z[:, None] * D[None, :]          # ascending, shape (n, d+1)
    lead = coef[:, -1]
    small = np.abs(lead) < 1e-14 * np.abs(coef).max(axis=1)
    lead = np.where(small, 1e-14 * np.abs(coef).max(axis=1), lead)
    comp = np.zeros((z.size, d, d), dtype=complex)
    if d > 1:
        comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, :, -1] = -coef[:, :-1] / lead[:, None]
    w = np.linalg.eigvals(comp)
    # Newton polish on N(w) - z D(w)
    dN, dD = P.polyder(N), P.polyder(D)
    for _ in range(3):
        g = P.polyval(w, N) - z[:, None] * P.polyval(w, D)
        dg = P.polyval(w, dN) - z[:, None] * P.polyval(w, dD)
        with np.errstate(all="ignore"):
            step = np.where(dg != 0, g / dg, 0)
        w = np.where(np.isfinite(step), w - step, w)
    return w


def _match_branches(prev: np.ndarray, nxt: np.ndarray) -> np.ndarray:
    """Reorder rows of nxt (n, d) to continue rows of prev with minimal jumps."""
    n, d = prev.shape
    if d == 1:
        return nxt
    if d <= 5:
        perms = np.array(list(itertools.permutations(range(d))))
        xp = stereographic(prev)                      # (n, d, 3)
        xn = stereographic(nxt)
        cost = np.stack([np.linalg.norm(xp - xn[:, pm, :], axis=-1).sum(axis=1) for pm in perms], axis=1)
        best = perms[np.argmin(cost, axis=1)]
        return np.take_along_axis(nxt, best, axis=1)
    from scipy.optimize import linear_sum_assignment
    out = np.empty_like(nxt)
    for i in range(n):
        c = chordal(prev[i][:, None], nxt[i][None, :])
        _, j = linear_sum_assignment(c)
        out[i] = nxt[i][j]
    return out


def _lift_loops(f: RationalMap, loops: list[np.ndarray]) -> list[np.ndarray]:
    """Preimage loops of each closed loop, joined along the monodromy."""
    out = []
    by_len: dict[int, list[np.ndarray]] = {}
    for loop in loops:
        by_len.setdefault(loop.size, []).append(loop)
    for m, group in by_len.items():
        L = np.stack(group)                                     # (g, m)
        g = L.shape[0]
        w = preimages(f, L.ravel()).reshape(g, m, -1)           # (g, m, d)
        d = w.shape[2]
        for k in range(1, m):
            w[:, k] = _match_branches(w[:, k - 1], w[:, k])
        # sigma[j]: branch j at the last sample continues into branch sigma[j] at sample 0
        wrapped = _match_branches(w[:, -1], w[:, 0])
        for i in range(g):
            sigma = [int(np.argmin(np.abs(w[i, 0] - wrapped[i, j]))) for j in range(d)]
            seen = set()
            for j in range(d):
                if j in seen:
                    continue
                pieces = []
                cur = j
                while cur not in seen:
                    seen.add(cur)
                    pieces.append(w[i, :, cur])
                    cur = sigma[cur]
                out.append(np.concatenate(pieces))
    return out


def _diameter(loop: np.ndarray) -> float:
    xyz = stereographic(loop)
    if xyz.shape[0] > 2000:
        from scipy.spatial import ConvexHull
        try:
            xyz = xyz[ConvexHull(xyz).vertices]
        except Exception:  # degenerate hull: fall back to full set
            pass
    return float(pdist(xyz).max()) if xyz.shape[0] > 1 else 0.0


def shrinking_probe(f: RationalMap, disk_center, disk_radius: float, depth: int,
                    samples: int = 512) -> list[float]:
    """Max chordal diameter C_n of the components of f^-n(D), n = 1..depth.

    The disk D is the chordal disk of radius ``disk_radius`` about
    ``disk_center``; components are tracked through preimages of a sampled
    boundary loop.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth == 0:
        return []
    d = f.degree
    if d ** depth > 1_000_000:
        raise DepthTooLarge(f"{d}^{depth} components exceed 1e6")
    loops = [_chordal_circle(as_point(disk_center).to_complex(), disk_radius, samples)]
    out = []
    for _ in range(depth):
        loops = _lift_loops(f, loops)
        out.append(max(_diameter(l) for l in loops))
    return out
