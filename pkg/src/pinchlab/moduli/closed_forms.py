"""Closed-form moduli of round annuli and disk-pair complements."""
from __future__ import annotations

import math

from ..errors import BadRadii, DisksTouch

LEMMA21_LOSS = 5 * math.log(2) / (2 * math.pi)


def round_modulus(r_in: float, r_out: float) -> float:
    """log(r_out/r_in)/(2π)."""
    if not (0 < r_in < r_out) or not math.isfinite(r_out):
        raise BadRadii(f"need 0 < r_in < r_out, got {r_in}, {r_out}")
    return math.log(r_out / r_in) / (2 * math.pi)


def kappa(r1: float, r2: float) -> float:
    r1, r2 = sorted((r1, r2))   # exact symmetry in floating point
    return (1 - r1 * r1 - r2 * r2) / (2 * r1 * r2)


def two_disk_modulus(r1: float, r2: float) -> float:
    """Modulus of the complement of D(0, r1) ∪ D(1, r2)."""
    if r1 <= 0 or r2 <= 0:
        raise BadRadii("radii must be positive")
    k = kappa(r1, r2)
    if k <= 1:
        raise DisksTouch(f"κ = {k} ≤ 1: disks touch or overlap")
    return math.log(k + math.sqrt(k * k - 1)) / (2 * math.pi)


def disk_pair_modulus(c1: complex, r1: float, c2: complex, r2: float) -> float:
    """Modulus of the complement of two disjoint closed disks, in any position."""
    if r1 <= 0 or r2 <= 0:
        raise BadRadii("radii must be positive")
    d = abs(complex(c2) - complex(c1))
    k = (d * d - r1 * r1 - r2 * r2) / (2 * r1 * r2)
    if k <= 1:
        raise DisksTouch(f"inversive distance {k} ≤ 1")
    return math.acosh(k) / (2 * math.pi)


def nested_disk_modulus(c_in: complex, r_in: float, c_out: complex, r_out: float) -> float:
    """Modulus of D(c_out, r_out) minus the closed disk D(c_in, r_in) (eccentric annulus)."""
    d = abs(complex(c_out) - complex(c_in))
    if r_in <= 0 or d + r_in >= r_out:
        raise BadRadii("inner disk must lie strictly inside the outer disk")
    k = (r_in * r_in + r_out * r_out - d * d) / (2 * r_in * r_out)
    return math.acosh(k) / (2 * math.pi)
