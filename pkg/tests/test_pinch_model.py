import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from pinchlab.errors import AtKnot, OutOfDomain
from pinchlab.moduli import round_modulus
from pinchlab.pinch_model import (PinchingModel, annulus_sample, beltrami, convergence_error, limit_map,
                                  modulus_law_rows, normalized_map, outer_zone_radii, pinch_map, rho_derivative,
                                  rho_profile)

R = 4.0


def _inside(model, frac):
    return frac * model.log_r


models = st.builds(PinchingModel, st.floats(1.1, 50.0), st.floats(0.0, 4.0))


# -- model ---------------------------------------------------------------------

def test_model_radii_ordering():
    for t in (0.0, 0.3, 2.0):
        m = PinchingModel(R, t)
        assert 1 < m.r_t <= m.r_prime < m.r


def test_model_rejects_bad_input():
    with pytest.raises(ValueError):
        PinchingModel(1.0, 0)
    with pytest.raises(ValueError):
        PinchingModel(2.0, -1)


# -- profile -------------------------------------------------------------------

@pytest.mark.parametrize("t", [0.0, 0.1, 1.0, 3.0])
def test_profile_continuous_at_knots(t):
    m = PinchingModel(R, t)
    L = m.log_r
    k1, k2 = m.knots
    assert math.exp(2 * t) * k1 == pytest.approx(0.5 * (math.log(2 * k1 / L) + 1 + 2 * t) * L, abs=1e-12)
    assert 0.5 * (math.log(2 * k2 / L) + 1 + 2 * t) * L == pytest.approx(k2 + t * L, abs=1e-12)
    assert rho_profile(k2, m) == pytest.approx((0.5 + t) * L, abs=1e-12)
    eps = 1e-9
    slope = math.exp(2 * t)
    for k in (k1, k2):
        assert abs(rho_profile(k + eps, m) - rho_profile(k - eps, m)) <= 2 * eps * slope * (1 + 1e-6)


def test_profile_identity_at_time_zero():
    m = PinchingModel(R, 0)
    x = np.linspace(-0.99, 0.99, 201) * m.log_r
    assert np.allclose(rho_profile(x, m), x, atol=1e-15)


def test_profile_symbolic_derivative():
    x, L, t = sympy.symbols("x L t", positive=True)
    mid = (sympy.log(2 * x / L) + 1 + 2 * t) * L / 2
    dmid = sympy.lambdify((x, L, t), sympy.diff(mid, x))
    m = PinchingModel(R, 0.7)
    s = 0.5 * (m.knots[0] + m.knots[1])
    assert rho_derivative(s, m) == pytest.approx(dmid(s, m.log_r, 0.7), rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(models, st.floats(-0.999, 0.999))
def test_profile_odd_and_increasing(m, frac):
    x = frac * m.log_r
    assert rho_profile(-x, m) == -rho_profile(x, m)
    assert rho_profile(min(x + 1e-3, 0.9999 * m.log_r), m) >= rho_profile(x, m)


def test_profile_out_of_domain():
    with pytest.raises(OutOfDomain):
        rho_profile(math.log(R), PinchingModel(R, 1))


# -- map -----------------------------------------------------------------------

def test_outer_zone_is_translation_in_log():
    m = PinchingModel(R, 1.5)
    z = R ** 0.75 * np.exp(0.3j)
    w = pinch_map(z, m)
    assert abs(w) == pytest.approx(R ** (0.75 + 1.5), rel=1e-13)
    assert np.angle(w) == pytest.approx(0.3)


def test_identity_at_time_zero():
    z = annulus_sample(1 / R, R, 500)
    assert np.allclose(pinch_map(z, PinchingModel(R, 0)), z, rtol=1e-14)


def test_unit_circle_preserved():
    z = np.exp(1j * np.linspace(0, 6, 50))
    assert np.allclose(np.abs(pinch_map(z, PinchingModel(R, 2))), 1, atol=1e-15)


def test_image_annulus_radii():
    m = PinchingModel(R, 2)
    z = np.array([R * (1 - 1e-12), 1 / R * (1 + 1e-12)])
    assert np.abs(pinch_map(z, m)) == pytest.approx([R ** 3, R ** -3], rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(models, st.floats(-0.99, 0.99), st.floats(-math.pi, math.pi))
def test_equator_symmetry(m, frac, ang):
    z = math.exp(frac * m.log_r) * np.exp(1j * ang)
    lhs = pinch_map(1 / np.conj(z), m)
    rhs = 1 / np.conj(pinch_map(z, m))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_map_out_of_domain():
    with pytest.raises(OutOfDomain):
        pinch_map(R, PinchingModel(R, 1))


# -- Beltrami coefficient ------------------------------------------------------

def test_beltrami_outer_zone_zero():
    assert beltrami(R ** 0.75 * 1j, PinchingModel(R, 3)) == 0


def _wirtinger_fd(f, z, h=1e-6):
    fx = (f(z + h) - f(z - h)) / (2 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return (fx + 1j * fy) / 2 / ((fx - 1j * fy) / 2)


@pytest.mark.parametrize("t", [0.2, 1.0, 2.5])
def test_beltrami_core_is_tanh(t):
    m = PinchingModel(R, t)
    z = 0.5 * m.r_t * np.exp(0.7j) if 0.5 * m.r_t > 1 else m.r_t ** 0.5 * np.exp(0.7j)
    mu = beltrami(z, m)
    assert abs(mu) == pytest.approx(math.tanh(t), rel=1e-13)
    assert mu == pytest.approx(_wirtinger_fd(lambda q: pinch_map(q, m), z), abs=1e-6)


def test_beltrami_middle_zone_finite_difference():
    m = PinchingModel(R, 1.0)
    z = math.exp(0.5 * (m.knots[0] + m.knots[1])) * np.exp(-2.1j)
    assert beltrami(z, m) == pytest.approx(_wirtinger_fd(lambda q: pinch_map(q, m), z), abs=1e-6)


def test_beltrami_zero_at_time_zero():
    z = annulus_sample(1 / R, R, 300)
    z = z[np.abs(np.abs(np.log(np.abs(z))) - 0.5 * math.log(R)) > 1e-6]
    assert np.all(beltrami(z, PinchingModel(R, 0)) == 0)


def test_beltrami_at_knot():
    m = PinchingModel(R, 1)
    with pytest.raises(AtKnot):
        beltrami(math.exp(m.knots[1]), m)


@settings(max_examples=100, deadline=None)
@given(models, st.floats(0.0, 3.0), st.floats(-0.999, 0.999), st.floats(-3, 3))
def test_beltrami_stable_outside_core(m, dt, frac, ang):
    """μ at time t + dt equals μ at time t wherever |log|z|| exceeds the core radius at t."""
    s = frac * m.log_r
    if abs(s) <= m.knots[0] * (1 + 1e-9) or min(abs(abs(s) - k) for k in m.knots) < 1e-9:
        return
    z = math.exp(s) * np.exp(1j * ang)
    later = PinchingModel(m.r, m.t + dt)
    if min(abs(abs(s) - k) for k in later.knots) < 1e-9:
        return
    assert beltrami(z, later) == beltrami(z, m)
    assert abs(beltrami(z, m)) < 1


# -- limit map -----------------------------------------------------------------

def test_limit_identity_zone():
    z = 0.9 * np.exp(0.4j)
    assert limit_map(z, 4) == z


def test_limit_puncture():
    assert abs(limit_map(0.25 * (1 + 1e-12), 4)) < 1e-3


def test_limit_seam_continuity():
    r = 4.0
    s = 1 / math.sqrt(r)
    lhs = np.log(np.abs(limit_map(s * (1 - 1e-13), r)))
    assert lhs == pytest.approx(-0.5 * math.log(r), abs=1e-10)


def test_uniform_convergence():
    errs = [convergence_error(R, t) for t in (0, 1, 2, 5, 10)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3


def test_normalized_map_large_t_no_overflow():
    z = annulus_sample(1 / R, 1, 100)
    assert np.all(np.isfinite(normalized_map(z, PinchingModel(R, 200))))


# -- modulus laws --------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(st.floats(1.1, 100.0), st.floats(0, 5), st.floats(0, 1))
def test_outer_zone_law_closed_form(r, t, frac):
    t0 = frac * t
    lo, hi = outer_zone_radii(PinchingModel(r, t), t0)
    assert round_modulus(lo, hi) == pytest.approx((2 * t0 + 1) / 4 * math.log(r) / math.pi, rel=1e-12)


def test_outer_zone_image_matches_map():
    m = PinchingModel(R, 2.0)
    lo, _ = outer_zone_radii(m, 0.5)
    assert abs(pinch_map(PinchingModel(R, 0.5).r_t, m)) == pytest.approx(lo, rel=1e-12)


def test_modulus_law_on_grid():
    rows = modulus_law_rows(2.0, [0, 1], [0.5], resolution=256, n=1024)
    for t, t0, measured, predicted in rows:
        assert measured == pytest.approx(predicted, rel=0.01)
