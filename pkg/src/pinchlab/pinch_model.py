"""Radial pinching model on the round annulus A(r) = {1/r < |z| < r}.

The map keeps arguments and sends log|z| to ϱ(log|z|), where ϱ is odd and,
writing L = log r, equals

    e^{2t} x                                 on [0, L/(2e^{2t})]
    (log(2x/L) + 1 + 2t) L / 2               on (L/(2e^{2t}), L/2)
    x + tL                                   on [L/2, L).

The image of A(r) is A(r^{1+t}); the map is conformal for |log|z|| > L/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AtKnot, OutOfDomain

KNOT_TOL = 1e-12


@dataclass(frozen=True)
class PinchingModel:
    r: float
    t: float = 0.0

    def __post_init__(self):
        if not self.r > 1:
            raise ValueError(f"need r > 1, got {self.r}")
        if not self.t >= 0:
            raise ValueError(f"need t >= 0, got {self.t}")

    @property
    def log_r(self) -> float:
        return math.log(self.r)

    @property
    def r_t(self) -> float:
        """Outer radius r^{1/(2e^{2t})} of the stretched core."""
        return self.r ** (0.5 * math.exp(-2 * self.t))

    @property
    def r_prime(self) -> float:
        return math.sqrt(self.r)

    @property
    def knots(self) -> tuple[float, float]:
        L = self.log_r
        return 0.5 * L * math.exp(-2 * self.t), 0.5 * L

    def image_radius(self) -> float:
        return self.r ** (1 + self.t)


def _check_x(x, model: PinchingModel) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(np.abs(x) < model.log_r)):
        raise OutOfDomain(f"|x| must be < log r = {model.log_r}")
    return x


def rho_profile(x, model: PinchingModel):
    """ϱ(x) for |x| < log r (vectorized)."""
    x = _check_x(x, model)
    L, t = model.log_r, model.t
    k1, k2 = model.knots
    a = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = 0.5 * (np.log(2 * a / L) + 1 + 2 * t) * L
    out = np.where(a <= k1, math.exp(2 * t) * a, np.where(a < k2, mid, a + t * L))
    out = np.sign(x) * out
    return float(out) if out.ndim == 0 else out


def rho_derivative(x, model: PinchingModel):
    x = _check_x(x, model)
    L, t = model.log_r, model.t
    k1, k2 = model.knots
    a = np.abs(x)
    with np.errstate(divide="ignore"):
        out = np.where(a <= k1, math.exp(2 * t), np.where(a < k2, L / (2 * np.maximum(a, 1e-300)), 1.0))
    return float(out) if out.ndim == 0 else out


def _check_z(z, model: PinchingModel) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    m = np.abs(z)
    if np.any(~((m > 1 / model.r) & (m < model.r))):
        raise OutOfDomain(f"points must satisfy 1/r < |z| < r with r = {model.r}")
    return z


def pinch_map(z, model: PinchingModel):
    """w_t(z): same argument, log|w| = ϱ(log|z|)."""
    z = _check_z(z, model)
    s = np.log(np.abs(z))
    out = z * np.exp(rho_profile(s, model) - s)
    return complex(out) if out.ndim == 0 else out


def beltrami(z, model: PinchingModel):
    """μ = ((ϱ' - 1)/(ϱ' + 1)) z / z̄ at s = log|z| (analytic)."""
    z = _check_z(z, model)
    s = np.log(np.abs(z))
    a = np.abs(s)
    for k in model.knots:
        if np.any(np.abs(a - k) <= KNOT_TOL * max(1.0, k)):
            raise AtKnot(f"|log|z|| = {k} is a knot of the profile")
    d = rho_derivative(s, model)
    out = (d - 1) / (d + 1) * z / np.conj(z)
    return complex(out) if out.ndim == 0 else out


def limit_map(z, r: float):
    """Limit of w_t(r z) / r^{1+t} as t -> ∞, on 1/r < |z| < 1."""
    if not r > 1:
        raise ValueError("need r > 1")
    z = np.asarray(z, dtype=complex)
    m = np.abs(z)
    if np.any(~((m > 1 / r) & (m < 1))):
        raise OutOfDomain("points must satisfy 1/r < |z| < 1")
    L = math.log(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = -0.5 * (1 + np.log(L / (2 * np.log(r * m)))) * L
    out = np.where(m >= 1 / math.sqrt(r), z, z / m * np.exp(logw))
    return complex(out) if out.ndim == 0 else out


def normalized_map(z, model: PinchingModel):
    """w_t(r z) / r^{1+t} on 1/r < |z| < 1, written in log form to avoid overflow."""
    z = np.asarray(z, dtype=complex)
    m = np.abs(z)
    s = np.log(model.r * m)
    logw = rho_profile(s, model) - (1 + model.t) * model.log_r
    out = z / m * np.exp(logw)
    return complex(out) if out.ndim == 0 else out


def annulus_sample(r_in: float, r_out: float, n: int) -> np.ndarray:
    """Deterministic sample of {r_in < |z| < r_out}, uniform in log-radius and angle."""
    k = np.arange(n)
    g = (math.sqrt(5) - 1) / 2
    s = math.log(r_in) + (math.log(r_out) - math.log(r_in)) * (k + 0.5) / n
    return np.exp(s + 2j * math.pi * ((k * g) % 1.0))


def convergence_error(r: float, t: float, n: int = 10_000) -> float:
    """sup over a sample of A(1/r, 1) of |w_t(rz)/r^{1+t} - w(z)|."""
    z = annulus_sample(1 / r, 1.0, n)
    return float(np.max(np.abs(normalized_map(z, PinchingModel(r, t)) - limit_map(z, r))))


def outer_zone_radii(model: PinchingModel, t0: float) -> tuple[float, float]:
    """Radii of the image of {r(t0) < |z| < r} under the model at time t ≥ t0."""
    if not 0 <= t0 <= model.t:
        raise ValueError("need 0 <= t0 <= t")
    x0 = 0.5 * model.log_r * math.exp(-2 * t0)
    L, t = model.log_r, model.t
    # x0 sits in the middle branch (or on its left knot when t = t0)
    lo = 0.5 * (math.log(2 * x0 / L) + 1 + 2 * t) * L
    return math.exp(lo), math.exp((1 + t) * L)


def image_loops(model: PinchingModel, n: int = 2048, inset: float = 1e-12):
    """Images of the two boundary circles of A(r), sampled just inside."""
    th = 2 * math.pi * np.arange(n) / n
    e = np.exp(1j * th)
    L = model.log_r * (1 - inset)
    return pinch_map(math.exp(-L) * e, model), pinch_map(math.exp(L) * e, model)


def modulus_law_rows(r: float, ts, t0s=(), resolution: int = 512, n: int = 2048):
    """Rows (t, t0, measured, predicted): whole-annulus law for t0 = None, else outer-zone law."""
    from .moduli import AnnulusRegion, grid_modulus
    rows = []
    mod_a = math.log(r) / math.pi
    for t in ts:
        m = PinchingModel(r, t)
        inner, outer = image_loops(m, n)
        est = grid_modulus(AnnulusRegion.sampled(inner, outer, 0j), resolution).estimate
        rows.append((float(t), None, est, (1 + t) * mod_a))
        for t0 in t0s:
            if t0 > t:
                continue
            e = np.exp(2j * math.pi * np.arange(n) / n)
            inner0 = pinch_map(PinchingModel(r, t0).r_t * e, m)
            reg = AnnulusRegion.sampled(inner0, outer, 0j)
            rows.append((float(t), float(t0), grid_modulus(reg, resolution).estimate, (2 * t0 + 1) / 4 * mod_a))
    return rows
