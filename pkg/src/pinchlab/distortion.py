"""Distortion functionals of a univalent map φ on a domain V.

D1(φ)(z, w) = |log(|φ'(z) φ'(w)| |z - w|² / |φ(z) - φ(w)|²)| vanishes
identically for Möbius maps.  D0 compares the moduli of A(E1, E2) and
A(φE1, φE2) over pairs of disjoint continua, sampled here with round disks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import CoincidentPoints, OutsideDomain
from .moduli import AnnulusRegion, disk_pair_modulus, grid_modulus
from .sphere import RationalMap

LOOP_POINTS = 1024
DOMAIN_MARGIN = 1e-9


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z, dtype=complex) - self.center) < self.radius * (1 - DOMAIN_MARGIN)


@dataclass(frozen=True)
class UnivalentSample:
    """A map with its derivative on a union of disks."""
    map: Callable
    derivative: Callable
    domain: tuple = (Disk(0j, 1.0),)
    name: str = "phi"
    rational: Optional[RationalMap] = field(default=None, compare=False)

    @classmethod
    def from_rational(cls, f: RationalMap, domain: Sequence[Disk] = (Disk(0j, 1.0),), name: str = "phi"):
        return cls(f.evaluate, f.derivative_complex, tuple(domain), name, f)

    @classmethod
    def quadratic_perturbation(cls, eps: float, name: Optional[str] = None):
        """z + ε z² on the unit disk (univalent for |ε| ≤ 1/2)."""
        return cls.from_rational(RationalMap.polynomial([0, 1, eps]), name=name or f"z+{eps}z^2")

    @classmethod
    def identity(cls):
        return cls.from_rational(RationalMap.polynomial([0, 1]), name="identity")

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        ok = np.zeros(z.shape, dtype=bool)
        for d in self.domain:
            ok |= d.contains(z)
        return ok

    def sample_points(self, u: np.ndarray) -> np.ndarray:
        """Map points of [0,1)² (rows of u) into V, area-uniformly per disk."""
        u = np.atleast_2d(u)
        k = np.minimum((u[:, 0] * len(self.domain)).astype(int), len(self.domain) - 1)
        u0 = u[:, 0] * len(self.domain) - k
        c = np.array([d.center for d in self.domain])[k]
        r = np.array([d.radius for d in self.domain])[k]
        return c + r * np.sqrt(u0) * np.exp(2j * np.pi * u[:, 1])

    def injectivity_violations(self, n_pairs: int = 10_000, seed: int = 0) -> int:
        """Pairs with images closer than 1e-12 although the sources are more than 1e-10 apart."""
        z, w = _halton_pairs(self, n_pairs, seed)
        fz, fw = self.map(z), self.map(w)
        return int(np.sum((np.abs(fz - fw) < 1e-12) & (np.abs(z - w) > 1e-10)))


def _halton_pairs(sample: UnivalentSample, n: int, seed: int):
    u = qmc.Halton(d=4, scramble=True, seed=seed).random(n)
    return sample.sample_points(u[:, :2]), sample.sample_points(u[:, 2:])


# ---------------------------------------------------------------------------
# D1
# ---------------------------------------------------------------------------

def _d1(fz, fw, dz, dw, z, w):
    # logs taken termwise so that very close pairs do not underflow
    ratio = np.log(np.abs(z - w)) - np.log(np.abs(fz - fw))
    return np.abs(np.log(np.abs(dz)) + np.log(np.abs(dw)) + 2 * ratio)


def d1_pointpair(sample: UnivalentSample, z: complex, w: complex) -> float:
    z, w = complex(z), complex(w)
    if not (np.isfinite(z) and np.isfinite(w)):
        raise OutsideDomain("points must be finite")
    if z == w:
        raise CoincidentPoints("z and w coincide")
    if not (sample.contains(z) and sample.contains(w)):
        raise OutsideDomain("points must lie in the domain")
    fz, fw = sample.map(np.array([z]))[0], sample.map(np.array([w]))[0]
    dz, dw = sample.derivative(np.array([z]))[0], sample.derivative(np.array([w]))[0]
    return float(_d1(fz, fw, dz, dw, z, w))


def d1_values(sample: UnivalentSample, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    return _d1(sample.map(z), sample.map(w), sample.derivative(z), sample.derivative(w), z, w)


def d1_sup(sample: UnivalentSample, n_pairs: int = 10_000, seed: int = 0) -> float:
    """Max of D1 over the first n_pairs points of a scrambled Halton sequence in V × V."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    z, w = _halton_pairs(sample, n_pairs, seed)
    keep = z != w
    return float(np.max(d1_values(sample, z[keep], w[keep]), initial=0.0))


# ---------------------------------------------------------------------------
# D0
# ---------------------------------------------------------------------------

@dataclass
class D0Config:
    c1: complex
    r1: float
    c2: complex
    r2: float
    source_exact: float
    source_grid: float
    image_grid: float

    @property
    def difference(self) -> float:
        return abs(self.image_grid - self.source_grid)


def _circle(c: complex, r: float, n: int = LOOP_POINTS) -> np.ndarray:
    return c + r * np.exp(2j * np.pi * np.arange(n) / n)


def _disk_configs(sample: UnivalentSample, n: int, seed: int):
    """Deterministic pairs of disjoint disks inside V."""
    u = qmc.Halton(d=4, scramble=True, seed=seed).random(4 * n + 16)
    out = []
    for row in u:
        a, b = sample.sample_points(row[None, :2])[0], sample.sample_points(row[None, 2:])[0]
        gap = abs(a - b)
        room_a = _room(sample, a)
        room_b = _room(sample, b)
        r1 = min(room_a, 0.4 * gap) * (0.3 + 0.6 * row[0])
        r2 = min(room_b, 0.4 * gap) * (0.3 + 0.6 * row[3])
        if r1 > 1e-3 and r2 > 1e-3 and gap > 1.2 * (r1 + r2):
            out.append((complex(a), float(r1), complex(b), float(r2)))
        if len(out) == n:
            break
    return out


def _room(sample: UnivalentSample, a: complex) -> float:
    return max((d.radius - abs(a - d.center) for d in sample.domain), default=0.0)


def d0_configuration(sample: UnivalentSample, c1: complex, r1: float, c2: complex, r2: float,
                     resolution: int = 512) -> D0Config:
    """One disk pair: source modulus (closed form and grid) and grid modulus of the image."""
    if _room(sample, c1) < r1 or _room(sample, c2) < r2:
        raise OutsideDomain("disks must lie inside the domain")
    exact = disk_pair_modulus(c1, r1, c2, r2)
    l1, l2 = _circle(c1, r1), _circle(c2, r2)
    src = grid_modulus(AnnulusRegion.two_continua(l1, l2, c1), resolution).estimate
    img = grid_modulus(AnnulusRegion.two_continua(sample.map(l1), sample.map(l2),
                                                  complex(sample.map(np.array([c1]))[0])), resolution).estimate
    return D0Config(c1, r1, c2, r2, exact, src, img)


def d0_estimate(sample: UnivalentSample, n_configs: int = 4, seed: int = 0, resolution: int = 512,
                configs: Optional[Sequence[tuple]] = None, details: bool = False):
    """Sampled lower bound of D0 over pairs of round disks in V.

    Source and image moduli are both measured on the raster from sampled
    boundary loops, so the discretization bias largely cancels.
    """
    cfgs = list(configs) if configs is not None else _disk_configs(sample, n_configs, seed)
    rows = [d0_configuration(sample, *c, resolution=resolution) for c in cfgs]
    best = max((r.difference for r in rows), default=0.0)
    return (best, rows) if details else best


# ---------------------------------------------------------------------------
# analytic bound for z + ε z²
# ---------------------------------------------------------------------------

def _pair_modulus(d, r1, r2) -> np.ndarray:
    """Vectorized disk-pair modulus; 0 once the disks touch."""
    k = (d * d - r1 * r1 - r2 * r2) / (2 * r1 * r2)
    return np.arccosh(np.maximum(k, 1.0)) / (2 * np.pi)


def _sandwich_bound(eps: float, a1, r1, a2, r2) -> np.ndarray:
    """Bound on |mod A(E1,E2) - mod A(φE1,φE2)| for disks E_i = D(a_i, r_i) and φ = z + εz².

    φ(a+h) - φ(a) = h (1 + 2εa + εh), so the image of D(a, r) lies between
    the disks about φ(a) of radii r(|1+2εa| ∓ |ε| r); modulus is monotone in
    the continua.
    """
    e = abs(eps)
    src = _pair_modulus(np.abs(a1 - a2), r1, r2)
    p1, p2 = a1 + eps * a1 ** 2, a2 + eps * a2 ** 2
    s1, s2 = np.abs(1 + 2 * eps * a1), np.abs(1 + 2 * eps * a2)
    d = np.abs(p1 - p2)
    hi = _pair_modulus(d, r1 * (s1 - e * r1), r2 * (s2 - e * r2))
    lo = _pair_modulus(d, r1 * (s1 + e * r1), r2 * (s2 + e * r2))
    return np.maximum(np.abs(hi - src), np.abs(src - lo))


def delta_bound(eps: float, rings: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 0.9, 0.97, 0.99, 0.999),
                angles: int = 16, radius_fractions: Sequence[float] = (1e-4, 1e-2, 0.1, 0.3, 0.6, 0.9)) -> float:
    """Upper bound for the disk-pair D0 of z + εz² on the unit disk.

    Each configuration is bounded rigorously by the image sandwich; the sup
    is taken over a lattice of centers and radii (tiny radii recover D1/2π).
    """
    centers = [0j] + [r * np.exp(2j * np.pi * (k + 0.5 * (i % 2)) / angles)
                      for i, r in enumerate(rings) if r > 0 for k in range(angles)]
    centers = np.array(centers)
    i, j = np.triu_indices(len(centers), 1)
    a1, a2 = centers[i], centers[j]
    gap = np.abs(a1 - a2)
    best = 0.0
    for f1 in radius_fractions:
        for f2 in radius_fractions:
            r1 = np.minimum(f1 * (1 - np.abs(a1)), 0.45 * gap)
            r2 = np.minimum(f2 * (1 - np.abs(a2)), 0.45 * gap)
            ok = (r1 > 0) & (r2 > 0) & (gap > r1 + r2)
            if ok.any():
                best = max(best, float(np.max(_sandwich_bound(eps, a1[ok], r1[ok], a2[ok], r2[ok]))))
    return best


# ---------------------------------------------------------------------------
# Möbius invariance
# ---------------------------------------------------------------------------

def _mobius_parts(m: RationalMap):
    if m.degree != 1:
        raise ValueError("expected a Möbius map")
    n = np.zeros(2, dtype=complex)
    d = np.zeros(2, dtype=complex)
    n[: len(m.num)] = m.num
    d[: len(m.den)] = m.den
    b, a = n
    dd, c = d
    return a, b, c, dd


def mobius_inverse(m: RationalMap) -> RationalMap:
    a, b, c, d = _mobius_parts(m)
    return RationalMap.mobius(d, -b, -c, a)


def conjugated_sample(sample: UnivalentSample, pre: RationalMap, post: RationalMap) -> UnivalentSample:
    """γ∘φ∘β with derivative by the chain rule."""
    a, b, c, d = _mobius_parts(pre)
    A, B, C, D = _mobius_parts(post)
    det_pre, det_post = a * d - b * c, A * D - B * C

    def fmap(z):
        u = sample.map((a * z + b) / (c * z + d))
        return (A * u + B) / (C * u + D)

    def dmap(z):
        x = (a * z + b) / (c * z + d)
        u = sample.map(x)
        return det_post / (C * u + D) ** 2 * sample.derivative(x) * det_pre / (c * z + d) ** 2

    return UnivalentSample(fmap, dmap, (), f"post∘{sample.name}∘pre")


@dataclass
class InvarianceReport:
    max_residual: float
    pairs_used: int
    passed: bool

    def as_dict(self) -> dict:
        return {"max_residual": self.max_residual, "pairs_used": self.pairs_used, "pass": self.passed}


def mobius_invariance_check(sample: UnivalentSample, pre_mobius: RationalMap, post_mobius: RationalMap,
                            n_pairs: int = 1000, seed: int = 0, tol: float = 1e-9,
                            pole_clearance: float = 1e-3) -> InvarianceReport:
    """max |D1(γ∘φ∘β)(β⁻¹z, β⁻¹w) - D1(φ)(z, w)| over Halton pairs in V.

    Pairs whose images come within ``pole_clearance`` of the pole of γ are skipped.
    """
    z, w = _halton_pairs(sample, n_pairs, seed)
    A, B, C, D = _mobius_parts(post_mobius)
    fz, fw = sample.map(z), sample.map(w)
    keep = (z != w)
    if C != 0:
        pole = -D / C
        keep &= (np.abs(fz - pole) > pole_clearance) & (np.abs(fw - pole) > pole_clearance)
    z, w = z[keep], w[keep]
    binv = mobius_inverse(pre_mobius)
    zz, ww = binv.evaluate(z), binv.evaluate(w)
    ok = np.isfinite(zz) & np.isfinite(ww)
    z, w, zz, ww = z[ok], w[ok], zz[ok], ww[ok]
    comp = conjugated_sample(sample, pre_mobius, post_mobius)
    res = np.abs(d1_values(comp, zz, ww) - d1_values(sample, z, w))
    worst = float(np.max(res, initial=0.0))
    return InvarianceReport(worst, int(z.size), worst < tol)


@dataclass
class DistortionReport:
    map_id: str
    d1_sup: float
    d0_estimate: float
    delta_bound: Optional[float]
    ratio: float
    pass_2pi_bound: Optional[bool]

    def as_dict(self) -> dict:
        return {"map_id": self.map_id, "d1_sup": self.d1_sup, "d0_estimate": self.d0_estimate,
                "delta_bound": self.delta_bound, "ratio": self.ratio, "pass_2pi_bound": self.pass_2pi_bound}


def distortion_report(sample: UnivalentSample, eps: Optional[float] = None, n_pairs: int = 10_000,
                      n_configs: int = 4, seed: int = 0, resolution: int = 512, slack: float = 0.02):
    s1 = d1_sup(sample, n_pairs, seed)
    s0 = d0_estimate(sample, n_configs, seed, resolution)
    db = delta_bound(eps) if eps is not None else None
    ratio = s1 / (2 * math.pi * s0) if s0 > 0 else math.inf if s1 > 0 else 0.0
    ok = None if db is None else bool(s1 <= 2 * math.pi * db + slack)
    return DistortionReport(sample.name, s1, s0, db, ratio, ok)
