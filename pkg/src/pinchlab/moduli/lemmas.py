"""Numerical checks of the modulus inequalities used by the pinching arguments.

* round annulus extraction: a round annulus essentially inside a sampled one,
  losing at most ``LEMMA21_LOSS`` of modulus;
* quadrilaterals to annulus: 1/mod A ≤ Σ 1/mod Q_i;
* three overlapping quadrilaterals: 1/mod Q ≤ Σ M²/mod Q_i.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import BadConfiguration, BadDecomposition, NoRoundAnnulus
from .closed_forms import LEMMA21_LOSS
from .grid import _raster, grid_modulus
from .regions import ALPHA, FREE, AnnulusRegion, Quadrilateral, RectQuad, _inside_polygon

COVER_TOL = 2e-3        # allowed fraction of uncovered / doubly covered raster cells


# ---------------------------------------------------------------------------
# round annulus extraction
# ---------------------------------------------------------------------------

@dataclass
class RoundAnnulusReport:
    z0: complex
    r1: float
    r2: float
    input_modulus: float
    round_modulus: float
    loss_bound: float = LEMMA21_LOSS
    margin: float = math.nan      # round - (input - loss)

    @property
    def holds(self) -> bool:
        return self.margin >= 0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["z0"] = [self.z0.real, self.z0.imag]
        d["holds"] = self.holds
        return d


def extract_round_annulus(region: AnnulusRegion, z0: complex, check_modulus: bool = True,
                          resolution: int = 512) -> AnnulusRegion:
    """Round annulus A(z0; r1, r2) with r1 = max |inner - z0|, r2 = min |outer - z0|.

    With ``check_modulus`` the input modulus must exceed the extraction loss.
    """
    if region.region_kind not in ("sampled", "round"):
        raise TypeError("extraction needs a sampled or round annulus")
    inner, outer = region.inner_loop, region.outer_loop
    z0 = complex(z0)
    hull = _convex_hull(inner)
    if not _inside_polygon(hull, np.array([z0]))[0]:
        raise NoRoundAnnulus(f"{z0} is not inside the convex hull of the inner continuum")
    r1 = float(np.max(np.abs(inner - z0)))
    r2 = float(np.min(np.abs(outer - z0)))
    if r1 >= r2:
        raise NoRoundAnnulus(f"inner reach {r1:.6g} >= outer clearance {r2:.6g}")
    if check_modulus:
        m = grid_modulus(region, resolution).estimate
        if m <= LEMMA21_LOSS:
            raise NoRoundAnnulus(f"modulus {m:.6g} does not exceed the loss {LEMMA21_LOSS:.6g}")
    return AnnulusRegion.round(r1, r2, z0)


def round_annulus_report(region: AnnulusRegion, z0: complex, resolution: int = 512,
                         check_modulus: bool = True) -> RoundAnnulusReport:
    ann = extract_round_annulus(region, z0, check_modulus=False)
    m_in = grid_modulus(region, resolution).estimate
    if check_modulus and m_in <= LEMMA21_LOSS:
        raise NoRoundAnnulus(f"modulus {m_in:.6g} does not exceed the loss {LEMMA21_LOSS:.6g}")
    m_out = ann.exact_modulus()
    return RoundAnnulusReport(complex(z0), ann.data["r_in"], ann.data["r_out"], m_in, m_out,
                              LEMMA21_LOSS, m_out - (m_in - LEMMA21_LOSS))


def _convex_hull(pts: np.ndarray) -> np.ndarray:
    from scipy.spatial import ConvexHull
    xy = np.column_stack([pts.real, pts.imag])
    return pts[ConvexHull(xy).vertices]


# ---------------------------------------------------------------------------
# quadrilaterals forming an annulus
# ---------------------------------------------------------------------------

@dataclass
class QuadAnnulusReport:
    annulus_modulus: float
    quad_moduli: list
    lhs: float                     # 1 / mod A
    rhs: float                     # Σ 1 / mod Q_i
    margin: float                  # rhs - lhs
    relative_margin: float
    uncovered_fraction: float
    overlap_fraction: float
    alpha_component: int

    def as_dict(self) -> dict:
        return asdict(self)


def verify_quad_annulus_inequality(annulus: AnnulusRegion, quads: Sequence[Quadrilateral],
                                   resolution: int = 512) -> QuadAnnulusReport:
    """Check 1/mod A ≤ Σ 1/mod Q_i for quadrilaterals decomposing the annulus.

    The decomposition is validated on the annulus raster: the quads must
    cover it without overlap and stay inside it, and every α side must lie on
    one common boundary component.
    """
    if not quads:
        raise BadDecomposition("no quadrilaterals")
    R = _raster(annulus, annulus.chart(resolution))
    Z = R.Z[R.L == FREE]
    count = np.zeros(Z.shape, dtype=int)
    for q in quads:
        count += q.label(Z) == FREE
    uncovered = float(np.mean(count == 0))
    overlap = float(np.mean(count > 1))
    if uncovered > COVER_TOL:
        raise BadDecomposition(f"{uncovered:.3%} of the annulus is not covered")
    if overlap > COVER_TOL:
        raise BadDecomposition(f"{overlap:.3%} of the annulus is covered twice")
    comps = set()
    for q in quads:
        Rq = _raster(q, q.chart(min(resolution, 256)))
        zq = Rq.Z[Rq.L == FREE]
        if np.mean(annulus.label(zq) != FREE) > COVER_TOL:
            raise BadDecomposition(f"{q!r} leaves the annulus")
        try:
            a = q.side_samples(ALPHA)
        except NotImplementedError:
            raise BadDecomposition(f"{q!r} cannot report its α side") from None
        comps.update(np.unique(annulus.boundary_component(a)).tolist())
    if len(comps) != 1:
        raise BadDecomposition("α sides lie on different boundary components")
    mA = grid_modulus(annulus, resolution).estimate
    mQ = [grid_modulus(q, resolution).estimate for q in quads]
    lhs = 1.0 / mA
    rhs = float(sum(1.0 / m for m in mQ))
    return QuadAnnulusReport(mA, mQ, lhs, rhs, rhs - lhs, (rhs - lhs) / lhs, uncovered, overlap, comps.pop())


# ---------------------------------------------------------------------------
# three overlapping quadrilaterals (rectangular model)
# ---------------------------------------------------------------------------

@dataclass
class ThreeQuadReport:
    moduli: dict
    M: float
    lhs: float                     # 1 / mod Q
    rhs: float                     # M² Σ 1/mod Q_i
    margin: float
    relative_margin: float
    exact: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def verify_three_quadrilateral_inequality(Q: RectQuad, Q1: RectQuad, Q2: Optional[RectQuad], Q3: RectQuad,
                                          beta1: float, beta3: float, resolution: int = 512) -> ThreeQuadReport:
    """Check 1/mod Q ≤ Σ M²/mod Q_i with M = max(mod Q12, mod Q23, 1).

    Q1 and Q3 carry the left and right vertical sides of Q; the vertical lines
    x = beta1 (inside Q1) and x = beta3 (inside Q3) bound Q2.  Pass ``Q2=None``
    to build it from the two lines.
    """
    for name, R in (("Q", Q), ("Q1", Q1), ("Q3", Q3)):
        if not isinstance(R, RectQuad):
            raise BadConfiguration(f"{name} must be a rectangle")
    y0, y1 = Q.y0, Q.y1
    if any((R.y0, R.y1) != (y0, y1) for R in (Q1, Q3)):
        raise BadConfiguration("Q1 and Q3 must span the full height of Q")
    if Q1.x0 != Q.x0 or Q3.x1 != Q.x1:
        raise BadConfiguration("Q1 and Q3 must carry the vertical sides of Q")
    if not Q1.x1 < Q3.x0:
        raise BadConfiguration("Q1 and Q3 must be disjoint")
    if not Q1.x0 < beta1 < Q1.x1:
        raise BadConfiguration(f"beta1 = {beta1} is not inside Q1")
    if not Q3.x0 < beta3 < Q3.x1:
        raise BadConfiguration(f"beta3 = {beta3} is not inside Q3")
    built = RectQuad(beta1, beta3, y0, y1)
    if Q2 is None:
        Q2 = built
    elif (Q2.x0, Q2.x1, Q2.y0, Q2.y1) != (built.x0, built.x1, built.y0, built.y1):
        raise BadConfiguration("Q2 must be the strip between beta1 and beta3")
    Q12 = RectQuad(beta1, Q1.x1, y0, y1)
    Q23 = RectQuad(Q3.x0, beta3, y0, y1)
    parts = {"Q": Q, "Q1": Q1, "Q2": Q2, "Q3": Q3, "Q12": Q12, "Q23": Q23}
    mods = {k: grid_modulus(v, resolution).estimate for k, v in parts.items()}
    M = max(mods["Q12"], mods["Q23"], 1.0)
    lhs = 1.0 / mods["Q"]
    rhs = M * M * sum(1.0 / mods[k] for k in ("Q1", "Q2", "Q3"))
    return ThreeQuadReport(mods, M, lhs, rhs, rhs - lhs, (rhs - lhs) / lhs,
                           {k: v.exact_modulus() for k, v in parts.items()})


# ---------------------------------------------------------------------------
# polyline files
# ---------------------------------------------------------------------------

def read_polylines(path) -> list[np.ndarray]:
    """Loops from a CSV of ``x,y`` rows; a blank line separates loops."""
    loops, cur = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not "".join(row).strip():
                if cur:
                    loops.append(np.array(cur, dtype=complex))
                    cur = []
                continue
            if row[0].strip().startswith("#"):
                continue
            try:
                cur.append(complex(float(row[0]), float(row[1])))
            except ValueError:
                if cur or loops:
                    raise
                # header row
    if cur:
        loops.append(np.array(cur, dtype=complex))
    return loops


def write_polylines(path, loops: Sequence[np.ndarray]) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        for k, loop in enumerate(loops):
            if k:
                fh.write("\n")
            for z in loop:
                w.writerow([repr(float(z.real)), repr(float(z.imag))])
