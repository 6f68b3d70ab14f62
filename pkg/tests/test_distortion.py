import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinchlab.distortion import (Disk, UnivalentSample, d0_configuration, d0_estimate, d1_pointpair, d1_sup,
                                 d1_values, delta_bound, distortion_report, mobius_inverse, mobius_invariance_check)
from pinchlab.errors import CoincidentPoints, OutsideDomain
from pinchlab.sphere import RationalMap

MOBIUS = RationalMap.mobius(2, 1, 1, 3)     # (2z+1)/(z+3), pole at -3
IDENTITY = RationalMap.mobius(1, 0, 0, 1)
PERTURB = UnivalentSample.quadratic_perturbation(0.1)


def mp_d1(phi, dphi, z, w):
    mpmath.mp.dps = 50
    z, w = mpmath.mpc(z), mpmath.mpc(w)
    val = abs(dphi(z)) * abs(dphi(w)) * abs(z - w) ** 2 / abs(phi(z) - phi(w)) ** 2
    return float(abs(mpmath.log(val)))


in_disk = st.tuples(st.floats(0, 0.99), st.floats(-math.pi, math.pi)).map(lambda p: p[0] * complex(math.cos(p[1]),
                                                                                                   math.sin(p[1])))


# -- D1 --------------------------------------------------------------------------

def test_identity_zero():
    s = UnivalentSample.identity()
    assert d1_pointpair(s, 0.1, -0.3j) == 0
    assert d1_sup(s, 500) == 0


def test_mobius_zero():
    s = UnivalentSample.from_rational(MOBIUS)
    rng = np.random.default_rng(1)
    z = 0.9 * np.sqrt(rng.uniform(size=1000)) * np.exp(2j * np.pi * rng.uniform(size=1000))
    w = 0.9 * np.sqrt(rng.uniform(size=1000)) * np.exp(2j * np.pi * rng.uniform(size=1000))
    assert np.max(d1_values(s, z, w)) < 1e-10
    assert d1_sup(s, 1000) < 1e-9


def test_perturbation_example_against_mpmath():
    value = d1_pointpair(PERTURB, 0, 0.5)
    assert value == pytest.approx(abs(math.log(1.1 * 0.25 / 0.525 ** 2)), rel=1e-12)
    assert value == pytest.approx(mp_d1(lambda x: x + x * x / 10, lambda x: 1 + x / 5, 0, 0.5), rel=1e-12)
    assert value == pytest.approx(0.002270148534539107, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(in_disk, in_disk)
def test_d1_against_mpmath(z, w):
    if abs(z - w) < 1e-6:
        return
    got = d1_pointpair(PERTURB, z, w)
    assert got == pytest.approx(mp_d1(lambda x: x + x * x / 10, lambda x: 1 + x / 5, z, w), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(in_disk, in_disk)
def test_d1_exchange_symmetric(z, w):
    if z == w:
        return
    assert d1_pointpair(PERTURB, z, w) == d1_pointpair(PERTURB, w, z)
    assert d1_pointpair(PERTURB, z, w) >= 0


def test_d1_errors():
    with pytest.raises(CoincidentPoints):
        d1_pointpair(PERTURB, 0.2, 0.2)
    with pytest.raises(OutsideDomain):
        d1_pointpair(PERTURB, 0.2, 1.5)
    with pytest.raises(OutsideDomain):
        d1_pointpair(PERTURB, 0.2, complex("nan"))


def test_d1_sup_monotone_in_pairs():
    vals = [d1_sup(PERTURB, n) for n in (10, 100, 1000, 5000)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[0] > 0


def test_multi_disk_domain_sampling():
    s = UnivalentSample.from_rational(RationalMap.polynomial([0, 1, 0.05]),
                                      domain=(Disk(-2, 0.5), Disk(2, 0.5)))
    z = s.sample_points(np.random.default_rng(0).uniform(size=(500, 2)))
    assert np.all(s.contains(z * (1 - 1e-12) + 1e-12 * np.array([-2 if x.real < 0 else 2 for x in z])))


def test_injectivity():
    assert PERTURB.injectivity_violations(2000) == 0


# -- Möbius invariance ---------------------------------------------------------

def test_invariance_identity_conjugation():
    rep = mobius_invariance_check(PERTURB, IDENTITY, IDENTITY)
    assert rep.max_residual == 0 and rep.passed


@pytest.mark.parametrize("seed", range(4))
def test_invariance_random_mobius(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
    pre = RationalMap.mobius(a, b, c, d)
    a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
    post = RationalMap.mobius(a, b, c, d)
    rep = mobius_invariance_check(PERTURB, pre, post)
    assert rep.passed, rep.max_residual
    assert rep.pairs_used > 500


def test_invariance_inversion():
    inv = RationalMap.mobius(0, 1, 1, 0)
    s = UnivalentSample.from_rational(RationalMap.polynomial([2, 1, 0.1]))   # image avoids 0
    rep = mobius_invariance_check(s, IDENTITY, inv)
    assert rep.passed and rep.pairs_used == 1000


def test_mobius_inverse():
    z = np.array([0.3 + 0.1j, -2, 5j])
    back = mobius_inverse(MOBIUS).evaluate(MOBIUS.evaluate(z))
    assert np.allclose(back, z, atol=1e-14)
    with pytest.raises(ValueError):
        mobius_inverse(RationalMap.quadratic(0))


# -- D0 --------------------------------------------------------------------------

def test_d0_identity_zero():
    assert d0_estimate(UnivalentSample.identity(), n_configs=2, resolution=256) == 0


def test_d0_mobius_noise_floor():
    assert d0_estimate(UnivalentSample.from_rational(MOBIUS), n_configs=2, resolution=256) < 0.01


def test_d0_perturbation_positive():
    s = UnivalentSample.quadratic_perturbation(0.05)
    row = d0_configuration(s, -0.5, 0.1, 0.5, 0.1, resolution=256)
    assert row.difference > 0
    assert row.source_grid == pytest.approx(row.source_exact, rel=0.01)


def test_d0_rejects_disks_outside():
    with pytest.raises(OutsideDomain):
        d0_configuration(PERTURB, 0.95, 0.1, -0.5, 0.1)


# -- the 2π bound --------------------------------------------------------------

def test_delta_bound_vanishes_for_identity():
    assert delta_bound(0.0) == 0


def test_delta_bound_linear_in_eps():
    b1, b2 = delta_bound(0.01), delta_bound(0.02)
    assert 1.5 < b2 / b1 < 2.5


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.1])
def test_d1_within_two_pi_delta(eps):
    s = UnivalentSample.quadratic_perturbation(eps)
    assert 0 < d1_sup(s) <= 2 * math.pi * delta_bound(eps) + 0.02


def test_report():
    rep = distortion_report(UnivalentSample.quadratic_perturbation(0.05), eps=0.05, n_pairs=2000, n_configs=1,
                            resolution=256)
    d = rep.as_dict()
    assert d["pass_2pi_bound"] is True
    assert d["d0_estimate"] > 0 and d["ratio"] > 0
