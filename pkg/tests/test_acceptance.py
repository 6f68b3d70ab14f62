"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed in the summary.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pinchlab.distortion import UnivalentSample, d1_sup, delta_bound, mobius_invariance_check
from pinchlab.dynamics import classify, shrinking_probe
from pinchlab.moduli import (SANDWICH_STATS, AnnulusRegion, RectQuad, SectorQuad, grid_modulus, round_annulus_report,
                             round_modulus, two_disk_modulus, verify_quad_annulus_inequality,
                             verify_three_quadrilateral_inequality)
from pinchlab.moduli.lemmas import LEMMA21_LOSS
from pinchlab.multicurve import build_matrix, irreducible_blocks, spectral_radius
from pinchlab.parabolic import abel_residual, build_petal, invariance_violations
from pinchlab.pinch_model import (PinchingModel, annulus_sample, beltrami, convergence_error, modulus_law_rows,
                                  outer_zone_radii)
from pinchlab.pinch_path import G_PARAMETER, PathConfig, run_path, sup_distance
from pinchlab.sphere import RationalMap

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    return ok


# -- 1 -------------------------------------------------------------------------

def check_1():
    worst, slowest = 0.0, 0.0
    for m in (0.05, 0.25, 0.5, 1.0, 1.5, 2.0):
        r_out = math.exp(2 * math.pi * m)
        t0 = time.perf_counter()
        est = grid_modulus(AnnulusRegion.round(1.0, r_out), 512).estimate
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, abs(est / round_modulus(1.0, r_out) - 1))
    return worst < 0.01 and slowest < 5, f"max rel err {worst:.2e}, slowest {slowest:.2f} s"


# -- 2 -------------------------------------------------------------------------

def check_2():
    exact = two_disk_modulus(0.25, 0.25)
    est = grid_modulus(AnnulusRegion.two_disks(0.25, 0.25), 512).estimate
    err = abs(est / exact - 1)
    return err < 0.02, f"closed form {exact:.6f}, grid {est:.6f}, rel err {err:.2e}"


# -- 3 (run last so it sees every solve in this module) ------------------------

def check_3():
    s = dict(SANDWICH_STATS)
    return s["violations"] == 0 and s["calls"] > 0, f"{s['calls']} grid solves, {s['violations']} violations"


# -- 4 -------------------------------------------------------------------------

def check_4():
    from fixtures import DISTORTED_ANNULI, distorted_annulus
    worst = math.inf
    for name in DISTORTED_ANNULI:
        reg, z0 = distorted_annulus(name)
        rep = round_annulus_report(reg, z0, 512)
        worst = min(worst, rep.round_modulus - (rep.input_modulus - LEMMA21_LOSS - 0.02))
    return worst >= 0, f"{len(DISTORTED_ANNULI)} fixtures, smallest margin {worst:.4f}"


# -- 5 -------------------------------------------------------------------------

def _sectors(r1, r2, n):
    return [SectorQuad(r1, r2, 2 * np.pi * k / n, 2 * np.pi * (k + 1) / n) for k in range(n)]


def check_5():
    margins = []
    for r2, n in ((3.0, 4), (10.0, 4), (5.0, 1), (5.0, 6)):
        margins.append(verify_quad_annulus_inequality(AnnulusRegion.round(1, r2), _sectors(1, r2, n), 256)
                       .relative_margin)
    for Q, Q1, Q3, b1, b3 in ((RectQuad(0, 3, 0, 1), RectQuad(0, 1.25, 0, 1), RectQuad(1.75, 3, 0, 1), 1, 2),
                              (RectQuad(0, 4, 0, 2), RectQuad(0, 1.5, 0, 2), RectQuad(2.5, 4, 0, 2), 1, 3)):
        margins.append(verify_three_quadrilateral_inequality(Q, Q1, None, Q3, b1, b3, 256).relative_margin)
    return min(margins) >= -0.02, f"{len(margins)} fixtures, smallest relative margin {min(margins):.4f}"


# -- 6 -------------------------------------------------------------------------

def check_6():
    r = 2.0
    rows = modulus_law_rows(r, [0, 1, 2, 5], [0, 0.5, 1], resolution=512)
    whole = max(abs(m / p - 1) for t, t0, m, p in rows if t0 is None)
    zone = max(abs(m / p - 1) for t, t0, m, p in rows if t0 is not None)
    closed = 0.0
    for t in (0, 1, 2, 5):
        for t0 in (0, 0.5, 1):
            if t0 <= t:
                lo, hi = outer_zone_radii(PinchingModel(r, t), t0)
                closed = max(closed, abs(round_modulus(lo, hi) - (2 * t0 + 1) / 4 * math.log(r) / math.pi))
    mu_max = 0.0
    for t in (0, 1, 2, 5):
        m = PinchingModel(r, t)
        z = annulus_sample(1 / r, r, 10_000)
        s = np.abs(np.log(np.abs(z)))
        z = z[(s > m.knots[1] + 1e-9) & (s < m.log_r)]
        mu_max = max(mu_max, float(np.max(np.abs(beltrami(z, m)))))
    conv = convergence_error(r, 10, 10_000)
    ok = whole < 0.01 and zone < 0.01 and closed < 1e-12 and mu_max == 0 and conv < 1e-3
    return ok, (f"whole-annulus law {whole:.2e}, outer-zone law {zone:.2e} (closed form {closed:.1e}), "
                f"outer |mu| {mu_max}, sup error at t=10 {conv:.2e}")


# -- 7 -------------------------------------------------------------------------

def check_7():
    from test_multicurve import FIXTURE_MATRICES, RATIONAL_FIXTURES
    rng = np.random.default_rng(7)
    mats = [np.asarray(a, float) for a in FIXTURE_MATRICES.values()]
    for _ in range(200):
        n = int(rng.integers(1, 9))
        a = np.zeros((n, n))
        for _ in range(int(rng.integers(0, 3 * n + 1))):
            a[rng.integers(n), rng.integers(n)] += 1.0 / int(rng.integers(1, 7))
        mats.append(a)
    eig = max(abs(spectral_radius(a) - float(np.max(np.abs(np.linalg.eigvals(a))))) for a in mats)
    blk = max(abs(max(spectral_radius(b) for b in irreducible_blocks(a)) - spectral_radius(a)) for a in mats)
    lam = max(spectral_radius(build_matrix(f())) for f in RATIONAL_FIXTURES.values())
    ok = eig < 1e-10 and blk < 1e-10 and lam <= 1 + 1e-9
    return ok, f"{len(mats)} matrices, eigvals gap {eig:.1e}, block gap {blk:.1e}, max rational-map lambda {lam}"


# -- 8, 9 ----------------------------------------------------------------------

_PATH = {}


def _path():
    if "report" not in _PATH:
        t0 = time.perf_counter()
        _PATH["report"] = run_path(PathConfig())
        _PATH["seconds"] = time.perf_counter() - t0
    return _PATH["report"], _PATH["seconds"]


def check_8():
    rep, secs = _path()
    v = rep.verdicts
    last = rep.rows[-1]
    gap = abs(last.c - G_PARAMETER)
    ok = gap < 1e-3 and v["PASS"] and secs < 120
    return ok, (f"|c(50)-1/4| = {gap:.2e}, sup dist {last.sup_dist_to_g:.2e}, tails decreasing "
                f"{v['sup_dist_tail_decreasing']}/{v['julia_hausdorff_tail_decreasing']}/"
                f"{v['fixed_point_gap_tail_decreasing']}, {secs:.1f} s")


def check_9():
    rep, _ = _path()
    rev = rep.reversed()
    g = RationalMap.quadratic(G_PARAMETER)
    certified = True
    for row in rev.rows:
        pp = classify(RationalMap.quadratic(row.c), row.lam / 2, 1)
        certified &= pp.classification == "attracting" and abs(pp.multiplier) < 1
    sups = [sup_distance(RationalMap.quadratic(r.c), g, 2000) for r in rev.rows]
    approaching = all(b > a for a, b in zip(sups, sups[1:]))
    ok = certified and approaching and rev.rows[0].t > rev.rows[-1].t
    return ok, (f"{len(rev.rows)} rows in decreasing t, all attracting with |lambda|<1: {certified}, "
                f"distance to g grows away from t=50: {approaching}")


# -- 10 ------------------------------------------------------------------------

def check_10():
    cases = ((RationalMap.mobius(1, 0, -1, 1), 0.0, 1e-12), (RationalMap.polynomial([0, 1, 1]), 0.0, 1e-6),
             (RationalMap.quadratic(0.25), 0.5, 1e-6))
    ok, parts = True, []
    for f, y, tol in cases:
        petal = build_petal(f, classify(f, y, 1), 0.5)
        res = abel_residual(f, petal, 100)
        bad = invariance_violations(f, petal)
        ok &= res < tol and bad == 0
        parts.append(f"{res:.1e}/{bad}")
    return ok, "residual/violations " + ", ".join(parts)


# -- 11 ------------------------------------------------------------------------

def check_11():
    ok, parts = True, []
    for name, c, center in (("z^2", 0, 3), ("z^2-1", -1, 2)):
        C = shrinking_probe(RationalMap.quadratic(c), center, 0.1, 8)
        tail = C[len(C) // 2 - 1:]
        dec = all(b < a for a, b in zip(tail, tail[1:]))
        small = C[-1] < C[0] / 4
        ok &= dec and small
        parts.append(f"{name}: C8/C1 = {C[-1] / C[0]:.3f}, tail decreasing {dec}")
    return ok, "; ".join(parts)


# -- 12 ------------------------------------------------------------------------

def check_12():
    ok, parts = True, []
    for eps in (0.01, 0.05, 0.1):
        s1, bound = d1_sup(UnivalentSample.quadratic_perturbation(eps)), 2 * math.pi * delta_bound(eps) + 0.02
        ok &= s1 <= bound
        parts.append(f"eps={eps}: {s1:.4f} <= {bound:.4f}")
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(5):
        pre = RationalMap.mobius(*(rng.normal(size=4) + 1j * rng.normal(size=4)))
        post = RationalMap.mobius(*(rng.normal(size=4) + 1j * rng.normal(size=4)))
        worst = max(worst, mobius_invariance_check(UnivalentSample.quadratic_perturbation(0.1), pre, post)
                    .max_residual)
    ok &= worst < 1e-9
    return ok, "; ".join(parts) + f"; Mobius residual {worst:.1e}"


CHECKS = {1: check_1, 2: check_2, 4: check_4, 5: check_5, 6: check_6, 7: check_7, 8: check_8, 9: check_9,
          10: check_10, 11: check_11, 12: check_12, 3: check_3}


def _run(n):
    ok, detail = CHECKS[n]()
    record(n, ok, detail)
    assert ok, detail


def test_criterion_01_round_annulus_grid():
    _run(1)


def test_criterion_02_two_disk_closed_form():
    _run(2)


def test_criterion_04_round_annulus_extraction():
    _run(4)


def test_criterion_05_quadrilateral_inequalities():
    _run(5)


def test_criterion_06_pinching_model_laws():
    _run(6)


def test_criterion_07_obstruction_linear_algebra():
    _run(7)


def test_criterion_08_pinching_path():
    _run(8)


def test_criterion_09_plumbing_direction():
    _run(9)


def test_criterion_10_parabolic_toolkit():
    _run(10)


def test_criterion_11_shrinking_probe():
    _run(11)


def test_criterion_12_distortion_bound():
    _run(12)


def test_criterion_03_sandwich_never_violated():
    _run(3)


if __name__ == "__main__":
    failed = 0
    for n in CHECKS:
        ok, detail = CHECKS[n]()
        failed += not record(n, ok, detail)
    sys.exit(1 if failed else 0)
