"""Raster estimator for the modulus of an annulus or a quadrilateral.

The harmonic potential (0 on one side, 1 on the other, insulated elsewhere)
is computed with the 5-point Laplacian on a uniform grid of a conformal chart;
the modulus is the reciprocal of its Dirichlet energy.  Curved Dirichlet
boundaries enter through the distance fraction θ of the boundary along each
cut edge (edge conductance 1/θ).  Every call also evaluates the flat-metric
extremal-length bounds Height²/Area ≤ mod ≤ Area/Width² and checks that the
estimate lies between them.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pyamg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.sparse.linalg import cg, spsolve

from ..errors import GridTooCoarse, SandwichViolation
from .regions import ALPHA, ALPHA_PRIME, FREE, INNER, OUTER, VERT_A, VERT_B, Chart, Region

MIN_FRACTION = 1e-4
BISECTION_STEPS = 30
CG_TOL = 1e-10
SANDWICH_RTOL = 1e-9
PATH_GRAPH_NODES = 40_000

# running tally of sandwich checks (calls, violations) for reporting
SANDWICH_STATS = {"calls": 0, "violations": 0}


@dataclass(frozen=True)
class GridMetric:
    """Flat metric ρ ≡ density on the raster."""
    resolution: int
    density: float = 1.0


@dataclass
class ModulusEstimate:
    estimate: float
    lower: float
    upper: float
    energy: float = math.nan
    area: float = math.nan
    height: float = math.nan
    width: float = math.nan
    n_free: int = 0
    resolution: int = 0
    seconds: float = 0.0
    metric: Optional[GridMetric] = None
    potential: Optional[np.ndarray] = field(default=None, repr=False)
    chart: Optional[Chart] = field(default=None, repr=False)

    def __iter__(self):
        return iter((self.estimate, self.lower, self.upper))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("estimate", "lower", "upper", "energy", "area", "height",
                                               "width", "n_free", "resolution", "seconds")}


# ---------------------------------------------------------------------------
# raster
# ---------------------------------------------------------------------------

@dataclass
class _Raster:
    chart: Chart
    X: np.ndarray          # (nx, ny) chart coordinates
    Y: np.ndarray
    Z: np.ndarray          # (nx, ny) points
    L: np.ndarray          # labels


def _raster(region: Region, chart: Chart) -> _Raster:
    X, Y = np.meshgrid(chart.X(), chart.Y(), indexing="ij")
    Z = chart.to_z(X, Y)
    return _Raster(chart, X, Y, Z, region.chart_label(chart, X, Y))


def _crossing(region: Region, chart: Chart, xa, ya, xb, yb) -> np.ndarray:
    """Fraction along a->b (a inside, b outside) where the region ends."""
    lo = np.zeros(xa.shape)
    hi = np.ones(xa.shape)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        inside = region.chart_label(chart, xa + mid * (xb - xa), ya + mid * (yb - ya)) == FREE
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return hi


def _neighbour_pairs(chart: Chart, offsets):
    """Flat index pairs (a, b) for the given (di, dj) offsets, plus a wrap flag."""
    nx, ny = chart.nx, chart.ny
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    out = []
    for di, dj in offsets:
        I2, J2 = I + di, J + dj
        ok = (I2 >= 0) & (I2 < nx)
        wrap = np.zeros_like(ok)
        if chart.periodic:
            wrap = (J2 < 0) | (J2 >= ny)
            J2 = J2 % ny
        else:
            ok &= (J2 >= 0) & (J2 < ny)
        a = (I * ny + J)[ok]
        b = (I2 * ny + J2)[ok]
        out.append((a, b, wrap[ok], (di, dj)))
    return out


# ---------------------------------------------------------------------------
# potential and energy
# ---------------------------------------------------------------------------

def _solve(region: Region, R: _Raster):
    chart = R.chart
    L = R.L.ravel()
    free = L == FREE
    if not free.any():
        raise GridTooCoarse("no raster node lies inside the region")
    lo_lab, hi_lab = (INNER, OUTER)
    idx = -np.ones(L.size, dtype=np.int64)
    idx[free] = np.arange(free.sum())
    nf = int(free.sum())
    h = chart.h
    Xf, Yf = R.X.ravel(), R.Y.ravel()
    Xg = R.X.ravel()
    # extents of each free node's cell toward -x, +x, -y, +y (in units of h)
    ext = np.full((nf, 4), 0.5)

    ii, jj = [], []
    bnode, bcond, bval = [], [], []
    for a, b, _, (di, dj) in _neighbour_pairs(chart, [(1, 0), (0, 1), (-1, 0), (0, -1)]):
        la, lb = L[a], L[b]
        if (di, dj) in ((1, 0), (0, 1)):
            both = (la == FREE) & (lb == FREE)
            ii.append(idx[a[both]])
            jj.append(idx[b[both]])
            clash = ((la == lo_lab) & (lb == hi_lab)) | ((la == hi_lab) & (lb == lo_lab))
            if clash.any():
                raise GridTooCoarse("the two boundary sides touch at raster scale")
        cut = (la == FREE) & (lb != FREE)
        if not cut.any():
            continue
        ac, bc = a[cut], b[cut]
        t = _crossing(region, chart, Xf[ac], Yf[ac], Xf[ac] + di * h, Yf[ac] + dj * h)
        col = {(-1, 0): 0, (1, 0): 1, (0, -1): 2, (0, 1): 3}[(di, dj)]
        ext[idx[ac], col] = t
        dir_ = (lb[cut] == lo_lab) | (lb[cut] == hi_lab)
        bnode.append(idx[ac[dir_]])
        bcond.append(t[dir_])
        bval.append((lb[cut][dir_] == hi_lab).astype(float))
    ii = np.concatenate(ii)
    jj = np.concatenate(jj)
    bnode = np.concatenate(bnode) if bnode else np.zeros(0, dtype=np.int64)
    tb = np.concatenate(bcond) if bcond else np.zeros(0)
    bval = np.concatenate(bval) if bval else np.zeros(0)
    ii, jj, bnode, bcond, bval, fixed_u, e_fixed = _snap_boundary_nodes(nf, ii, jj, bnode, tb, bval)

    # z-area of the free cells (flat metric)
    Xfree = Xg[free]
    area = float(np.sum(chart.area(Xfree, ext[:, 0] * h, ext[:, 1] * h, ext[:, 2] * h, ext[:, 3] * h)))

    # keep only components that see both boundary values
    Adj = sp.coo_matrix((np.ones(ii.size), (ii, jj)), shape=(nf, nf)).tocsr()
    ncomp, comp = connected_components(Adj, directed=False)
    has0 = np.zeros(ncomp, bool)
    has1 = np.zeros(ncomp, bool)
    has0[comp[bnode[bval == 0]]] = True
    has1[comp[bnode[bval == 1]]] = True
    active_c = has0 & has1
    if not active_c.any():
        raise GridTooCoarse("no raster path joins the two boundary sides")
    act = active_c[comp]
    aidx = -np.ones(nf, dtype=np.int64)
    aidx[act] = np.arange(act.sum())
    na = int(act.sum())
    keep = act[ii] & act[jj]
    ia, ja = aidx[ii[keep]], aidx[jj[keep]]
    kb = act[bnode]
    bn, bc, bv = aidx[bnode[kb]], bcond[kb], bval[kb]

    diag = np.bincount(ia, minlength=na) + np.bincount(ja, minlength=na) + np.bincount(bn, weights=bc, minlength=na)
    A = sp.coo_matrix((np.concatenate([-np.ones(ia.size), -np.ones(ia.size), diag]),
                       (np.concatenate([ia, ja, np.arange(na)]), np.concatenate([ja, ia, np.arange(na)]))),
                      shape=(na, na)).tocsr()
    rhs = np.bincount(bn, weights=bc * bv, minlength=na)
    u = _linear_solve(A, rhs)
    energy = float(np.sum((u[ia] - u[ja]) ** 2) + np.sum(bc * (u[bn] - bv) ** 2)) + e_fixed
    full = np.full(L.size, np.nan)
    fidx = np.flatnonzero(free)
    full[fidx[act]] = u
    snapped = ~np.isnan(fixed_u)
    full[fidx[snapped]] = fixed_u[snapped]
    return energy, area, nf, full.reshape(R.L.shape)


def _snap_boundary_nodes(nf, ii, jj, bnode, tb, bval):
    """Nodes closer than MIN_FRACTION·h to a Dirichlet side take the boundary value.

    Their links to free neighbours become unit-conductance boundary links.
    Returns the rewritten edge/boundary arrays with conductances 1/t, the
    fixed values (NaN where free) and the energy of links between fixed nodes.
    """
    fixed_u = np.full(nf, np.nan)
    snap = tb < MIN_FRACTION
    if not snap.any():
        return ii, jj, bnode, 1.0 / tb, bval, fixed_u, 0.0
    order = np.argsort(-tb[snap])           # nearest crossing written last
    fixed_u[bnode[snap][order]] = bval[snap][order]
    fixed = ~np.isnan(fixed_u)
    fi, fj = fixed[ii], fixed[jj]
    both = fi & fj
    e_fixed = float(np.sum((fixed_u[ii[both]] - fixed_u[jj[both]]) ** 2))
    keep_b = ~fixed[bnode]
    bnode = np.concatenate([bnode[keep_b], jj[fi & ~fj], ii[fj & ~fi]])
    bcond = np.concatenate([1.0 / tb[keep_b], np.ones(int((fi & ~fj).sum() + (fj & ~fi).sum()))])
    bval = np.concatenate([bval[keep_b], fixed_u[ii[fi & ~fj]], fixed_u[jj[fj & ~fi]]])
    free_edge = ~fi & ~fj
    return ii[free_edge], jj[free_edge], bnode, bcond, bval, fixed_u, e_fixed


def _linear_solve(A, b):
    if A.shape[0] < 200:
        return np.atleast_1d(spsolve(A.tocsc(), b))
    ml = pyamg.ruge_stuben_solver(A)
    M = ml.aspreconditioner(cycle="V")
    u, info = cg(A, b, rtol=CG_TOL, atol=0.0, M=M, maxiter=2000)
    if info != 0:
        u = spsolve(A.tocsc(), b)
    return u


# ---------------------------------------------------------------------------
# extremal-length path bounds
# ---------------------------------------------------------------------------

def _path_graph(region: Region, chart: Chart):
    R = _raster(region, chart)
    L = R.L.ravel()
    Z = R.Z.ravel()
    Xf, Yf = R.X.ravel(), R.Y.ravel()
    free = L == FREE
    nf = int(free.sum())
    idx = -np.ones(L.size, dtype=np.int64)
    idx[free] = np.arange(nf)
    rows, cols, wts, wrapf = [], [], [], []
    for a, b, wrap, _ in _neighbour_pairs(chart, [(1, 0), (0, 1), (1, 1), (1, -1)]):
        both = free[a] & free[b]
        rows.append(idx[a[both]])
        cols.append(idx[b[both]])
        wts.append(np.abs(Z[a[both]] - Z[b[both]]))
        wrapf.append(wrap[both])
    term = {}
    h = chart.h
    for a, b, _, (di, dj) in _neighbour_pairs(chart, [(1, 0), (0, 1), (-1, 0), (0, -1)]):
        cut = free[a] & (L[b] != FREE) & (L[b] >= 0)
        if not cut.any():
            continue
        ac = a[cut]
        t = _crossing(region, chart, Xf[ac], Yf[ac], Xf[ac] + di * h, Yf[ac] + dj * h)
        zc = chart.to_z(Xf[ac] + t * di * h, Yf[ac] + t * dj * h)
        for lab in np.unique(L[b][cut]):
            m = L[b][cut] == lab
            term.setdefault(int(lab), []).append((idx[ac[m]], np.abs(Z[ac[m]] - zc[m])))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    wts = np.maximum(np.concatenate(wts), 1e-300)
    wrapf = np.concatenate(wrapf)
    return nf, rows, cols, wts, wrapf, term, Z[free], R


def _terminal_distance(nf, rows, cols, wts, term, src, dst) -> float:
    if src not in term or dst not in term:
        return math.nan
    s, t = nf, nf + 1
    r = [rows]
    c = [cols]
    w = [wts]
    for lab, node in ((src, s), (dst, t)):
        for nodes, ww in term[lab]:
            r.append(np.full(nodes.size, node))
            c.append(nodes)
            w.append(np.maximum(ww, 1e-300))
    G = sp.coo_matrix((np.concatenate(w), (np.concatenate(r), np.concatenate(c))), shape=(nf + 2, nf + 2)).tocsr()
    d = dijkstra(G, directed=False, indices=s)
    return float(d[t])


def _loop_width(nf, rows, cols, wts, wrapf, zfree, center) -> float:
    """Shortest closed raster path crossing the angular seam once."""
    keep = ~wrapf
    G = sp.coo_matrix((wts[keep], (rows[keep], cols[keep])), shape=(nf, nf)).tocsr()
    wr, wc, ww = rows[wrapf], cols[wrapf], wts[wrapf]
    if wr.size == 0:
        return math.nan
    # seed a bound with the seam edge closest to the chart centre
    k0 = int(np.argmin(np.abs(zfree[wc] - center)))
    d0 = dijkstra(G, directed=False, indices=int(wc[k0]))
    best = float(ww[k0] + d0[wr[k0]])
    srcs = np.unique(wc)
    for start in range(0, srcs.size, 32):
        chunk = srcs[start:start + 32]
        D = dijkstra(G, directed=False, indices=chunk, limit=best)
        pos = {int(s): i for i, s in enumerate(chunk)}
        sel = np.isin(wc, chunk)
        ii = np.array([pos[int(x)] for x in wc[sel]])
        cand = ww[sel] + D[ii, wr[sel]]
        if cand.size:
            best = min(best, float(np.min(cand)))
    return best


def path_bounds(region: Region, resolution: int):
    """(Height, Width) of the flat metric on a raster of at most ~40k nodes."""
    chart = region.chart(resolution)
    factor = int(math.ceil(math.sqrt(chart.nx * chart.ny / PATH_GRAPH_NODES)))
    cc = region.chart(max(8, resolution // factor)) if factor > 1 else chart
    nf, rows, cols, wts, wrapf, term, zfree, _ = _path_graph(region, cc)
    if region.kind == "quad":
        H = _terminal_distance(nf, rows, cols, wts, term, ALPHA, ALPHA_PRIME)
        W = _terminal_distance(nf, rows, cols, wts, term, VERT_A, VERT_B)
    else:
        H = _terminal_distance(nf, rows, cols, wts, term, INNER, OUTER)
        W = _loop_width(nf, rows, cols, wts, wrapf, zfree, cc.center) if cc.periodic else math.nan
    return H, W


# ---------------------------------------------------------------------------
# public entry point
# ---------------------------------------------------------------------------

def grid_modulus(region: Region, resolution: int = 512, check: bool = True,
                 keep_potential: bool = False) -> ModulusEstimate:
    """Modulus estimate with flat-metric Height/Width bounds.

    For annuli ``resolution`` is the number of angular cells of the
    log-polar chart; for Cartesian quadrilaterals it is cells per unit
    length.  Raises SandwichViolation if lower <= estimate <= upper fails.
    """
    if resolution < 4:
        raise GridTooCoarse("resolution must be at least 4")
    t0 = time.perf_counter()
    chart = region.chart(resolution)
    R = _raster(region, chart)
    energy, area, nf, u = _solve(region, R)
    est = 1.0 / energy
    H, W = path_bounds(region, resolution)
    lower = H * H / area if np.isfinite(H) else 0.0
    upper = area / (W * W) if (np.isfinite(W) and W > 0) else math.inf
    res = ModulusEstimate(est, lower, upper, energy, area, H, W, nf, resolution,
                          time.perf_counter() - t0, GridMetric(resolution, 1.0),
                          u if keep_potential else None, chart)
    if check:
        SANDWICH_STATS["calls"] += 1
        if not (lower <= est * (1 + SANDWICH_RTOL) and est <= upper * (1 + SANDWICH_RTOL)):
            SANDWICH_STATS["violations"] += 1
            raise SandwichViolation(f"bounds violated: {lower} <= {est} <= {upper} fails")
    return res
