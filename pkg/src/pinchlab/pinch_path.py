"""Pinching path in the quadratic family, driven in multiplier coordinates.

An attracting fixed point with multiplier λ0 ∈ (0, 1) is pushed toward the
parabolic map g(z) = z² + 1/4 by log λ(t) = log λ0 / (1 + t).  Each row of the
report measures how close f_t = z² + c(t) is to g: uniformly on the sphere, in
Julia-set Hausdorff distance, and at the attracting fixed point.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .dynamics import classify, periodic_points
from .errors import BadMultiplier, EmptyCloud, NoRepellingSeedPoint
from .sphere import RationalMap, chordal, stereographic

BURN_IN = 50
G_PARAMETER = 0.25
PARABOLIC_POINT = 0.5
SUP_TARGET = 1e-2


# ---------------------------------------------------------------------------
# family coordinates
# ---------------------------------------------------------------------------

def multiplier_schedule(lambda0: complex, t: float) -> complex:
    lambda0 = complex(lambda0)
    if not 0 < abs(lambda0) < 1:
        raise BadMultiplier(f"need 0 < |λ0| < 1, got {lambda0}")
    if not t >= 0:
        raise BadMultiplier(f"need t >= 0, got {t}")
    return cmath.exp(cmath.log(lambda0) / (1 + t))


def parameter_from_multiplier(lam: complex) -> complex:
    lam = complex(lam)
    return lam / 2 - lam * lam / 4


def quadratic_from_multiplier(lam: complex) -> RationalMap:
    """z² + c whose fixed point λ/2 has multiplier λ."""
    return RationalMap.quadratic(parameter_from_multiplier(lam))


# ---------------------------------------------------------------------------
# sphere and Julia samples
# ---------------------------------------------------------------------------

def fibonacci_sphere(n: int) -> np.ndarray:
    """n points of the Fibonacci lattice, as complex numbers under stereographic projection."""
    k = np.arange(n) + 0.5
    zc = 1 - 2 * k / n
    phi = math.pi * (3 - math.sqrt(5)) * k
    rho = np.sqrt(1 - zc * zc)
    return rho * np.exp(1j * phi) / (1 - zc)


def sup_distance(f: RationalMap, g: RationalMap, n: int = 10_000) -> float:
    """max chordal distance between f and g over a Fibonacci-lattice sample of the sphere."""
    if n < 100:
        raise ValueError("need at least 100 sample points")
    z = fibonacci_sphere(n)
    return float(np.max(chordal(f.evaluate(z), g.evaluate(z))))


def _seed_point(f: RationalMap) -> complex:
    """A finite repelling fixed point; else a parabolic one; else a repelling point of period ≤ 4."""
    fixed = [p for p in periodic_points(f, 1) if not p.location.is_infinity]
    for want in ("repelling", "parabolic"):
        for p in fixed:
            if p.classification == want:
                return p.z
    for period in (2, 3, 4):
        for p in periodic_points(f, period):
            if p.classification == "repelling" and not p.location.is_infinity:
                return p.z
    raise NoRepellingSeedPoint("no finite repelling or parabolic periodic point of low period")


def _branch_bits(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 2 ** 31, size=n)


def julia_sample(f: RationalMap, n: int, seed: int, burn_in: int = BURN_IN) -> np.ndarray:
    """Backward orbit under uniformly chosen inverse branches, after a burn-in.

    For z² + c the two branches are ±i√(c - z), whose cut is the ray from c
    through the β fixed point; samples of nearby maps then correspond point
    by point when driven by the same seed.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    z = _seed_point(f)
    choices = _branch_bits(n + burn_in, seed)
    out = np.empty(n, dtype=complex)
    quad = f.is_polynomial and f.degree == 2
    if quad:
        a0, a1, a2 = (complex(x) for x in np.asarray(f.N, dtype=complex) / complex(f.D[0]))
        # w² a2 + w a1 + a0 = z  ->  complete the square
        shift = a1 / (2 * a2)
        c = a0 - a1 * a1 / (4 * a2)
        for k, b in enumerate(choices):
            u = 1j * cmath.sqrt((c - z) / a2)
            z = (u if b & 1 else -u) - shift
            if k >= burn_in:
                out[k - burn_in] = z
        return out
    from .dynamics import preimages
    d = f.degree
    for k, b in enumerate(choices):
        w = preimages(f, np.array([z]))[0]
        w = w[np.lexsort((w.imag, w.real))]
        z = w[int(b) % d]
        if k >= burn_in:
            out[k - burn_in] = z
    return out


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two point clouds in the chordal metric."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptyCloud("point clouds must be non-empty")
    # the unit-sphere embedding turns chordal distance into Euclidean distance
    A, B = stereographic(a), stereographic(b)
    da, _ = cKDTree(B).query(A)
    db, _ = cKDTree(A).query(B)
    return float(max(da.max(), db.max()))


# ---------------------------------------------------------------------------
# the path
# ---------------------------------------------------------------------------

def default_schedule(t_max: float = 50.0, steps: int = 50) -> tuple:
    return tuple(float(x) for x in np.linspace(0.0, t_max, steps + 1))


@dataclass(frozen=True)
class PathConfig:
    lambda0: complex = 0.25
    t_schedule: tuple = field(default_factory=default_schedule)
    grid_points: int = 10_000
    julia_points: int = 10_000
    seed: int = 0

    def __post_init__(self):
        lam = complex(self.lambda0)
        if not 0 < abs(lam) < 1:
            raise BadMultiplier(f"need 0 < |λ0| < 1, got {lam}")
        ts = tuple(float(t) for t in self.t_schedule)
        if not ts or ts[0] != 0.0 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("t_schedule must start at 0 and increase strictly")
        if self.grid_points < 100 or self.julia_points < 100:
            raise ValueError("sample counts must be >= 100")
        object.__setattr__(self, "lambda0", lam)
        object.__setattr__(self, "t_schedule", ts)


@dataclass(frozen=True)
class PathRow:
    t: float
    lam: complex
    c: complex
    sup_dist_to_g: float
    julia_hausdorff_to_g: float
    attracting_period_point_gap: float
    classification: str
    certified_multiplier: complex

    def as_list(self) -> list:
        return [self.t, self.lam.real, self.lam.imag, self.c.real, self.c.imag, self.sup_dist_to_g,
                self.julia_hausdorff_to_g, self.attracting_period_point_gap, self.classification,
                abs(self.certified_multiplier)]


CSV_HEADER = ["t", "lambda_re", "lambda_im", "c_re", "c_im", "sup_dist_to_g", "julia_hausdorff_to_g",
              "attracting_period_point_gap", "fixed_point_class", "abs_multiplier"]


def _fmt(x) -> str:
    return format(x, ".17g") if isinstance(x, float) else str(x)


def _decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


@dataclass
class PathReport:
    config: PathConfig
    rows: list
    reverse: bool = False

    def tail(self) -> list:
        """Rows over the final half of the schedule (in forward time)."""
        rows = sorted(self.rows, key=lambda r: r.t)
        half = rows[-1].t / 2
        return [r for r in rows if r.t >= half]

    @property
    def verdicts(self) -> dict:
        tail = self.tail()
        last = max(self.rows, key=lambda r: r.t)
        v = {
            "sup_dist_tail_decreasing": _decreasing([r.sup_dist_to_g for r in tail]),
            "julia_hausdorff_tail_decreasing": _decreasing([r.julia_hausdorff_to_g for r in tail]),
            "fixed_point_gap_tail_decreasing": _decreasing([r.attracting_period_point_gap for r in tail]),
            "final_sup_dist_below_target": last.sup_dist_to_g < SUP_TARGET,
            "all_rows_attracting": all(r.classification in ("attracting", "superattracting")
                                       for r in self.rows),
        }
        v["PASS"] = all(v[k] for k in ("sup_dist_tail_decreasing", "julia_hausdorff_tail_decreasing",
                                       "fixed_point_gap_tail_decreasing", "final_sup_dist_below_target"))
        return v

    def reversed(self) -> "PathReport":
        """Plumbing reading: the same rows in decreasing t."""
        return PathReport(self.config, list(reversed(self.rows)), not self.reverse)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([_fmt(x) for x in r.as_list()])
        return buf.getvalue()


def run_path(config: PathConfig, progress=None) -> PathReport:
    g = RationalMap.quadratic(G_PARAMETER)
    cloud_g = julia_sample(g, config.julia_points, config.seed)
    rows = []
    for k, t in enumerate(config.t_schedule):
        lam = multiplier_schedule(config.lambda0, t)
        c = parameter_from_multiplier(lam)
        f = RationalMap.quadratic(c)
        pp = classify(f, lam / 2, 1)
        sup = sup_distance(f, g, config.grid_points)
        cloud = julia_sample(f, config.julia_points, config.seed)
        hd = hausdorff(cloud, cloud_g)
        gap = float(chordal(pp.z, PARABOLIC_POINT))
        rows.append(PathRow(float(t), lam, c, sup, hd, gap, pp.classification, pp.multiplier))
        if progress:
            progress(k, rows[-1])
    return PathReport(config, rows)
