"""Annuli and quadrilaterals as labelled planar regions with a raster chart.

A region answers two questions: which side of it a point lies on
(``label``) and which computational chart to rasterize it in (``chart``).
Labels: FREE (inside), INNER/ALPHA = 0 and OUTER/ALPHA_PRIME = 1 (Dirichlet
sides), VERT_A = 2 and VERT_B = 3 (insulated quadrilateral sides), NEUMANN
(insulated, no further meaning).
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from matplotlib.path import Path

from ..errors import BadRadii, DisksTouch
from . import closed_forms

FREE = -2
NEUMANN = -1
INNER = ALPHA = 0
OUTER = ALPHA_PRIME = 1
VERT_A = 2
VERT_B = 3

FAR_FACTOR = 100.0


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    """Uniform cell-centred raster in a conformal chart.

    ``cartesian``: z = X + iY.  ``logpolar``: z = center + exp(X + iY), so X
    is log-radius and Y is angle.  Nodes sit at (x0 + (i+1/2)h, y0 + (j+1/2)h).
    """

    kind: str
    x0: float
    y0: float
    h: float
    nx: int
    ny: int
    periodic: bool = False
    center: complex = 0j

    def X(self):
        return self.x0 + (np.arange(self.nx) + 0.5) * self.h

    def Y(self):
        return self.y0 + (np.arange(self.ny) + 0.5) * self.h

    def to_z(self, X, Y):
        if self.kind == "cartesian":
            return np.asarray(X) + 1j * np.asarray(Y)
        return self.center + np.exp(np.asarray(X) + 1j * np.asarray(Y))

    def area(self, X, xlo, xhi, ylo, yhi):
        """z-area of the chart box [X-xlo, X+xhi] x [Y-ylo, Y+yhi]."""
        if self.kind == "cartesian":
            return (xlo + xhi) * (ylo + yhi)
        return (ylo + yhi) * (np.exp(2 * (X + xhi)) - np.exp(2 * (X - xlo))) / 2


def logpolar_chart(center: complex, s_min: float, s_max: float, resolution: int) -> Chart:
    h = 2 * math.pi / resolution
    nx = int(math.ceil((s_max - s_min) / h)) + 4
    return Chart("logpolar", s_min - 2 * h, -math.pi, h, nx, resolution, True, complex(center))


def box_chart(x0: float, x1: float, y0: float, y1: float, h: float, kind: str = "cartesian",
              center: complex = 0j, pad: int = 2) -> Chart:
    """Non-periodic chart whose cell faces pass through x0 and y0."""
    nx = int(math.ceil((x1 - x0) / h - 1e-9)) + 2 * pad
    ny = int(math.ceil((y1 - y0) / h - 1e-9)) + 2 * pad
    return Chart(kind, x0 - pad * h, y0 - pad * h, h, nx, ny, False, complex(center))


# ---------------------------------------------------------------------------
# region base
# ---------------------------------------------------------------------------

class Region(ABC):
    kind: str = "annulus"   # or "quad"

    @abstractmethod
    def label(self, z: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def chart(self, resolution: int) -> Chart:
        ...

    def chart_label(self, chart: Chart, X, Y) -> np.ndarray:
        """Labels of chart points; overridden where the chart is not injective."""
        return self.label(chart.to_z(X, Y))

    def contains(self, z) -> np.ndarray:
        return self.label(np.asarray(z, dtype=complex)) == FREE

    def exact_modulus(self) -> Optional[float]:
        return None

    def transformed(self, a: complex, b: complex) -> "Region":
        raise NotImplementedError(f"{type(self).__name__} does not support affine maps")


def _inside_polygon(loop: np.ndarray, z: np.ndarray) -> np.ndarray:
    path = Path(np.column_stack([loop.real, loop.imag]))
    pts = np.column_stack([z.real.ravel(), z.imag.ravel()])
    return path.contains_points(pts).reshape(z.shape)


def _polygon_extent(loop: np.ndarray, z0: complex):
    d = np.abs(loop - z0)
    return float(d.min()), float(d.max())


def interior_point(loop: np.ndarray) -> complex:
    """A point well inside a closed polyline (centroid if it lies inside)."""
    loop = np.asarray(loop, dtype=complex)
    c = complex(loop.mean())
    if _inside_polygon(loop, np.array([c]))[0]:
        best = c
        best_d = np.abs(loop - c).min()
    else:
        best, best_d = None, -1.0
    xs = np.linspace(loop.real.min(), loop.real.max(), 41)
    ys = np.linspace(loop.imag.min(), loop.imag.max(), 41)
    g = (xs[None, :] + 1j * ys[:, None]).ravel()
    ins = _inside_polygon(loop, g)
    if best is None and not ins.any():
        raise ValueError("loop has no interior at the sampling scale")
    if ins.any():
        cand = g[ins]
        dist = np.min(np.abs(cand[:, None] - loop[None, :]), axis=1)
        k = int(np.argmax(dist))
        if dist[k] > 1.5 * best_d:
            best, best_d = complex(cand[k]), dist[k]
    return best


# ---------------------------------------------------------------------------
# annuli
# ---------------------------------------------------------------------------

class AnnulusRegion(Region):
    """A doubly connected region; see the ``round``/``two_disks``/``sampled``/
    ``two_continua`` constructors."""

    kind = "annulus"

    def __init__(self, kind: str, **data):
        self.region_kind = kind
        self.data = data
        if kind == "round":
            c, ri, ro = data["center"], data["r_in"], data["r_out"]
            if not (0 < ri < ro):
                raise BadRadii(f"need 0 < r_in < r_out, got {ri}, {ro}")
        elif kind == "disks":
            c1, r1, c2, r2 = data["c1"], data["r1"], data["c2"], data["r2"]
            if r1 <= 0 or r2 <= 0:
                raise BadRadii("radii must be positive")
            if abs(c2 - c1) <= r1 + r2:
                raise DisksTouch("disks intersect")
        elif kind == "sampled":
            self._inner = np.asarray(data["inner"], dtype=complex)
            self._outer = np.asarray(data["outer"], dtype=complex)
            if self._inner.size < 3 or self._outer.size < 3:
                raise ValueError("boundary loops need at least 3 points")
            if not np.all(_inside_polygon(self._outer, self._inner)):
                raise ValueError("inner loop must lie strictly inside the outer loop")
            if np.any(_inside_polygon(self._inner, self._outer)):
                raise ValueError("loops cross")
            self._z0 = data.get("z0") or interior_point(self._inner)
        elif kind == "two_continua":
            self._l1 = np.asarray(data["loop1"], dtype=complex)
            self._l2 = np.asarray(data["loop2"], dtype=complex)
            if np.any(_inside_polygon(self._l1, self._l2)) or np.any(_inside_polygon(self._l2, self._l1)):
                raise ValueError("continua must be disjoint")
            self._z0 = data.get("z0") or interior_point(self._l1)
        else:
            raise ValueError(f"unknown annulus kind {kind!r}")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def round(cls, r_in: float, r_out: float, center: complex = 0j) -> "AnnulusRegion":
        return cls("round", center=complex(center), r_in=float(r_in), r_out=float(r_out))

    @classmethod
    def two_disks(cls, r1: float, r2: float) -> "AnnulusRegion":
        """Complement of the closed disks D(0, r1) and D(1, r2)."""
        if r1 <= 0 or r2 <= 0:
            raise BadRadii("radii must be positive")
        if r1 + r2 >= 1:
            raise DisksTouch("r1 + r2 must be < 1")
        return cls("disks", c1=0j, r1=float(r1), c2=1 + 0j, r2=float(r2))

    @classmethod
    def disk_pair(cls, c1: complex, r1: float, c2: complex, r2: float) -> "AnnulusRegion":
        return cls("disks", c1=complex(c1), r1=float(r1), c2=complex(c2), r2=float(r2))

    @classmethod
    def sampled(cls, inner: Sequence[complex], outer: Sequence[complex], z0: Optional[complex] = None):
        return cls("sampled", inner=np.asarray(inner, dtype=complex), outer=np.asarray(outer, dtype=complex),
                   z0=z0)

    @classmethod
    def two_continua(cls, loop1: Sequence[complex], loop2: Sequence[complex], z0: Optional[complex] = None):
        """Complement in the sphere of two disjoint filled polylines."""
        return cls("two_continua", loop1=np.asarray(loop1, dtype=complex), loop2=np.asarray(loop2, dtype=complex),
                   z0=z0)

    # -- geometry -------------------------------------------------------------
    @property
    def inner_loop(self) -> np.ndarray:
        if self.region_kind == "sampled":
            return self._inner
        if self.region_kind == "round":
            return self.data["center"] + self.data["r_in"] * np.exp(2j * np.pi * np.arange(1024) / 1024)
        raise AttributeError("no inner loop for this kind")

    @property
    def outer_loop(self) -> np.ndarray:
        if self.region_kind == "sampled":
            return self._outer
        if self.region_kind == "round":
            return self.data["center"] + self.data["r_out"] * np.exp(2j * np.pi * np.arange(1024) / 1024)
        raise AttributeError("no outer loop for this kind")

    def label(self, z):
        z = np.asarray(z, dtype=complex)
        k = self.region_kind
        out = np.full(z.shape, FREE, dtype=np.int8)
        if k == "round":
            r = np.abs(z - self.data["center"])
            out[r <= self.data["r_in"]] = INNER
            out[r >= self.data["r_out"]] = OUTER
        elif k == "disks":
            out[np.abs(z - self.data["c1"]) <= self.data["r1"]] = INNER
            out[np.abs(z - self.data["c2"]) <= self.data["r2"]] = OUTER
        elif k == "sampled":
            out[_inside_polygon(self._inner, z)] = INNER
            out[~_inside_polygon(self._outer, z)] = OUTER
        else:
            out[_inside_polygon(self._l1, z)] = INNER
            out[_inside_polygon(self._l2, z)] = OUTER
        return out

    def chart(self, resolution: int) -> Chart:
        k = self.region_kind
        if k == "round":
            return logpolar_chart(self.data["center"], math.log(self.data["r_in"]),
                                  math.log(self.data["r_out"]), resolution)
        if k == "disks":
            c1, r1, c2, r2 = (self.data[x] for x in ("c1", "r1", "c2", "r2"))
            far = FAR_FACTOR * (abs(c2 - c1) + r2)
            return logpolar_chart(c1, math.log(r1), math.log(far), resolution)
        if k == "sampled":
            dmin, _ = _polygon_extent(self._inner, self._z0)
            _, dmax = _polygon_extent(self._outer, self._z0)
            return logpolar_chart(self._z0, math.log(0.5 * dmin), math.log(1.02 * dmax), resolution)
        dmin, _ = _polygon_extent(self._l1, self._z0)
        _, dmax = _polygon_extent(np.concatenate([self._l1, self._l2]), self._z0)
        return logpolar_chart(self._z0, math.log(0.5 * dmin), math.log(FAR_FACTOR * dmax), resolution)

    def exact_modulus(self) -> Optional[float]:
        if self.region_kind == "round":
            return closed_forms.round_modulus(self.data["r_in"], self.data["r_out"])
        if self.region_kind == "disks":
            d = self.data
            return closed_forms.disk_pair_modulus(d["c1"], d["r1"], d["c2"], d["r2"])
        return None

    def transformed(self, a: complex, b: complex) -> "AnnulusRegion":
        """Image under z -> a z + b."""
        k = self.region_kind
        if k == "round":
            return AnnulusRegion.round(abs(a) * self.data["r_in"], abs(a) * self.data["r_out"],
                                       a * self.data["center"] + b)
        if k == "disks":
            d = self.data
            return AnnulusRegion.disk_pair(a * d["c1"] + b, abs(a) * d["r1"], a * d["c2"] + b, abs(a) * d["r2"])
        if k == "sampled":
            return AnnulusRegion.sampled(a * self._inner + b, a * self._outer + b, a * self._z0 + b)
        return AnnulusRegion.two_continua(a * self._l1 + b, a * self._l2 + b, a * self._z0 + b)

    def boundary_component(self, z) -> np.ndarray:
        """0 or 1: the complementary component nearer to each point."""
        z = np.asarray(z, dtype=complex)
        k = self.region_kind
        if k == "round":
            r = np.abs(z - self.data["center"])
            return (np.abs(r - self.data["r_out"]) < np.abs(r - self.data["r_in"])).astype(int)
        if k == "disks":
            d = self.data
            d1 = np.abs(np.abs(z - d["c1"]) - d["r1"])
            d2 = np.abs(np.abs(z - d["c2"]) - d["r2"])
            return (d2 < d1).astype(int)
        a, b = (self._inner, self._outer) if k == "sampled" else (self._l1, self._l2)
        return (_dist_to_polyline(z, b) < _dist_to_polyline(z, a)).astype(int)

    def __repr__(self):
        return f"AnnulusRegion({self.region_kind}, {', '.join(f'{k}=...' if isinstance(v, np.ndarray) else f'{k}={v!r}' for k, v in self.data.items())})"


def _dist_to_polyline(z: np.ndarray, loop: np.ndarray, closed: bool = True) -> np.ndarray:
    z = np.asarray(z, dtype=complex).ravel()
    a = loop
    b = np.roll(loop, -1) if closed else loop[1:]
    if not closed:
        a = loop[:-1]
    ab = b - a
    L2 = np.maximum(np.abs(ab) ** 2, 1e-300)
    best = np.full(z.shape, np.inf)
    for start in range(0, z.size, 4096):
        zz = z[start:start + 4096, None]
        t = np.clip(((zz - a[None, :]) * np.conj(ab[None, :])).real / L2[None, :], 0, 1)
        d = np.abs(zz - (a[None, :] + t * ab[None, :]))
        best[start:start + 4096] = d.min(axis=1)
    return best


# ---------------------------------------------------------------------------
# quadrilaterals
# ---------------------------------------------------------------------------

class Quadrilateral(Region):
    """Base for quadrilaterals: potential 0 on α, 1 on α', insulated vertical sides."""

    kind = "quad"

    def side_samples(self, side: int, n: int = 64) -> np.ndarray:
        raise NotImplementedError


class RectQuad(Quadrilateral):
    """[x0,x1] x [y0,y1] with α the bottom and α' the top; modulus (y1-y0)/(x1-x0)."""

    def __init__(self, x0: float, x1: float, y0: float, y1: float):
        if not (x0 < x1 and y0 < y1):
            raise ValueError("degenerate rectangle")
        self.x0, self.x1, self.y0, self.y1 = map(float, (x0, x1, y0, y1))

    def label(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        out = np.full(z.shape, FREE, dtype=np.int8)
        # distance outside each side in units of the violation
        dl, dr = self.x0 - x, x - self.x1
        db, dt = self.y0 - y, y - self.y1
        worst = np.maximum.reduce([dl, dr, db, dt])
        out[(worst >= 0) & (worst == db)] = ALPHA
        out[(worst >= 0) & (worst == dt)] = ALPHA_PRIME
        out[(worst >= 0) & (worst == dl)] = VERT_A
        out[(worst >= 0) & (worst == dr)] = VERT_B
        return out

    def chart(self, resolution: int) -> Chart:
        w = self.x1 - self.x0
        nx = max(2, int(round(w * resolution)))
        return box_chart(self.x0, self.x1, self.y0, self.y1, w / nx)

    def exact_modulus(self) -> float:
        return (self.y1 - self.y0) / (self.x1 - self.x0)

    def inside_closed(self, z, tol=1e-12):
        z = np.asarray(z, dtype=complex)
        return ((z.real >= self.x0 - tol) & (z.real <= self.x1 + tol)
                & (z.imag >= self.y0 - tol) & (z.imag <= self.y1 + tol))

    def __repr__(self):
        return f"RectQuad([{self.x0}, {self.x1}] x [{self.y0}, {self.y1}])"


class SectorQuad(Quadrilateral):
    """Annular sector {r_in < |z-c| < r_out, θ0 < arg(z-c) < θ1}.

    ``mode="radial"``: α is the outer arc, α' the inner arc, the radial
    segments are the vertical sides.  ``mode="arch"``: α is the outer arc
    minus an angular margin ``foot`` at each end, those two short outer arcs
    are the vertical sides, and α' is the inner arc together with both radial
    segments.
    """

    def __init__(self, r_in, r_out, theta0, theta1, center=0j, mode="radial", foot=0.0):
        if not (0 < r_in < r_out):
            raise BadRadii("need 0 < r_in < r_out")
        if not theta0 < theta1 <= theta0 + 2 * math.pi:
            raise ValueError("need θ0 < θ1 ≤ θ0 + 2π")
        if mode not in ("radial", "arch"):
            raise ValueError("mode must be 'radial' or 'arch'")
        if mode == "arch" and not 0 < 2 * foot < theta1 - theta0:
            raise ValueError("arch mode needs 0 < foot < (θ1-θ0)/2")
        self.r_in, self.r_out = float(r_in), float(r_out)
        self.theta0, self.theta1 = float(theta0), float(theta1)
        self.center = complex(center)
        self.mode, self.foot = mode, float(foot)

    def _polar(self, z):
        w = np.asarray(z, dtype=complex) - self.center
        s = np.log(np.maximum(np.abs(w), 1e-300))
        mid = 0.5 * (self.theta0 + self.theta1)
        th = mid + np.angle(w * np.exp(-1j * mid))
        return s, th

    def label(self, z):
        return self._label_polar(*self._polar(z))

    def chart_label(self, chart: Chart, X, Y) -> np.ndarray:
        # angles are read off the chart so a full turn keeps its cut
        if chart.kind == "logpolar" and chart.center == self.center:
            return self._label_polar(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))
        return self.label(chart.to_z(X, Y))

    def _label_polar(self, s, th):
        out = np.full(np.shape(s), FREE, dtype=np.int8)
        si, so = math.log(self.r_in), math.log(self.r_out)
        d_in, d_out = si - s, s - so
        d_a, d_b = self.theta0 - th, th - self.theta1
        worst = np.maximum.reduce([d_in, d_out, d_a, d_b])
        outside = worst >= 0
        if self.mode == "radial":
            out[outside & (worst == d_out)] = ALPHA
            out[outside & (worst == d_in)] = ALPHA_PRIME
            out[outside & (worst == d_a)] = VERT_A
            out[outside & (worst == d_b)] = VERT_B
        else:
            out[outside] = ALPHA_PRIME
            top = outside & (worst == d_out)
            out[top & (th > self.theta0 + self.foot) & (th < self.theta1 - self.foot)] = ALPHA
            out[top & (th <= self.theta0 + self.foot)] = VERT_A
            out[top & (th >= self.theta1 - self.foot)] = VERT_B
        return out

    def chart(self, resolution: int) -> Chart:
        h = 2 * math.pi / resolution
        # faces through θ0 so radial Neumann sides are exact
        n = max(2, int(round((self.theta1 - self.theta0) / h)))
        h = (self.theta1 - self.theta0) / n
        return box_chart(math.log(self.r_in), math.log(self.r_out), self.theta0, self.theta1, h,
                         kind="logpolar", center=self.center)

    def exact_modulus(self) -> Optional[float]:
        if self.mode == "radial":
            return math.log(self.r_out / self.r_in) / (self.theta1 - self.theta0)
        return None

    def inside_closed(self, z, tol=1e-12):
        s, th = self._polar(z)
        return ((s >= math.log(self.r_in) - tol) & (s <= math.log(self.r_out) + tol)
                & (th >= self.theta0 - tol) & (th <= self.theta1 + tol))

    def side_samples(self, side: int, n: int = 64) -> np.ndarray:
        if side == ALPHA:
            a = self.theta0 + (self.foot if self.mode == "arch" else 0.0)
            b = self.theta1 - (self.foot if self.mode == "arch" else 0.0)
            t = a + (b - a) * (np.arange(n) + 0.5) / n
            return self.center + self.r_out * np.exp(1j * t)
        raise NotImplementedError

    def __repr__(self):
        return (f"SectorQuad(r=({self.r_in}, {self.r_out}), θ=({self.theta0:.4f}, {self.theta1:.4f}), "
                f"mode={self.mode})")


class PolygonQuad(Quadrilateral):
    """Simple polygon with four consecutive boundary pieces.

    ``sides`` gives the vertex index where each piece starts, in the order
    α, vertical A, α', vertical B (going around the polygon).
    """

    def __init__(self, vertices: Sequence[complex], sides: Sequence[int]):
        v = np.asarray(vertices, dtype=complex)
        if v.size < 4 or len(sides) != 4:
            raise ValueError("need >= 4 vertices and 4 side start indices")
        s = list(sides)
        if sorted(s) != s or s[0] < 0 or s[-1] >= v.size:
            raise ValueError("side start indices must be increasing")
        self.vertices = v
        self.sides = s
        n = v.size
        self._pieces = []
        for k in range(4):
            a, b = s[k], s[(k + 1) % 4]
            idx = list(range(a, b + 1)) if k < 3 else list(range(a, n)) + list(range(0, s[0] + 1))
            self._pieces.append(v[idx])

    def label(self, z):
        z = np.asarray(z, dtype=complex)
        inside = _inside_polygon(self.vertices, z)
        out = np.full(z.shape, FREE, dtype=np.int8)
        zo = z[~inside]
        if zo.size:
            d = np.stack([_dist_to_polyline(zo, p, closed=False) for p in self._pieces])
            code = np.array([ALPHA, VERT_A, ALPHA_PRIME, VERT_B], dtype=np.int8)
            out[~inside] = code[np.argmin(d, axis=0)]
        return out

    def chart(self, resolution: int) -> Chart:
        v = self.vertices
        return box_chart(v.real.min(), v.real.max(), v.imag.min(), v.imag.max(), 1.0 / resolution)

    def side_samples(self, side: int, n: int = 64) -> np.ndarray:
        order = {ALPHA: 0, VERT_A: 1, ALPHA_PRIME: 2, VERT_B: 3}
        p = self._pieces[order[side]]
        seg = np.abs(np.diff(p))
        cum = np.concatenate([[0], np.cumsum(seg)])
        t = cum[-1] * (np.arange(n) + 0.5) / n
        return np.interp(t, cum, p.real) + 1j * np.interp(t, cum, p.imag)
