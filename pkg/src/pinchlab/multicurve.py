"""Transition matrices of multicurves and their Perron roots.

Isotopy classes of preimage curves are supplied by the caller (``isotopic_to``);
deciding isotopy from geometry is out of scope.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import NoConvergence, UnknownLabel

SPECTRAL_SHIFT = 1.0
SPECTRAL_TOL = 1e-12
MAX_POWER_ITER = 1_000_000
BOUNDARY_TOL = 1e-9

CONTEXTS = ("general", "geometrically_finite_with_accumulation")


@dataclass(frozen=True)
class Lift:
    target_curve: str
    preimage_component_id: str
    degree: int
    isotopic_to: Optional[str] = None


@dataclass(frozen=True)
class CoverData:
    curves: tuple
    lifts: tuple
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(str(c) for c in self.curves))
        object.__setattr__(self, "lifts", tuple(self.lifts))
        if len(set(self.curves)) != len(self.curves):
            raise ValueError("curve labels must be distinct")
        seen = set()
        for lf in self.lifts:
            key = (lf.target_curve, lf.preimage_component_id)
            if key in seen:
                raise ValueError(f"duplicate lift {key}")
            seen.add(key)
            if int(lf.degree) != lf.degree or lf.degree < 1:
                raise ValueError(f"lift {key} needs a positive integer degree")

    @classmethod
    def from_dict(cls, d: dict) -> "CoverData":
        lifts = tuple(Lift(str(x["target_curve"]), str(x["preimage_component_id"]), int(x["degree"]),
                           None if x.get("isotopic_to") is None else str(x["isotopic_to"]))
                      for x in d.get("lifts", []))
        return cls(tuple(d["curves"]), lifts, d.get("note", ""))

    @classmethod
    def from_json(cls, text: str) -> "CoverData":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"curves": list(self.curves),
                "lifts": [{"target_curve": l.target_curve, "preimage_component_id": l.preimage_component_id,
                           "degree": l.degree, "isotopic_to": l.isotopic_to} for l in self.lifts],
                **({"note": self.note} if self.note else {})}


@dataclass(frozen=True)
class TransitionMatrix:
    labels: tuple
    entries: np.ndarray = field(repr=False)
    exact: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != len(self.labels):
            raise ValueError("entries must be a square matrix matching the labels")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ValueError("entries must be finite and nonnegative")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    def submatrix(self, idx: Sequence[int]) -> "TransitionMatrix":
        idx = list(idx)
        ex = None
        if self.exact is not None:
            ex = tuple(tuple(self.exact[i][j] for j in idx) for i in idx)
        return TransitionMatrix(tuple(self.labels[i] for i in idx), self.entries[np.ix_(idx, idx)], ex)

    def to_dict(self) -> dict:
        d = {"labels": list(self.labels), "entries": self.entries.tolist()}
        if self.exact is not None:
            d["exact"] = [[str(x) for x in row] for row in self.exact]
        return d


def build_matrix(data: CoverData) -> TransitionMatrix:
    """a[β, γ] = Σ 1/deg over lifts of γ isotopic to β."""
    pos = {c: i for i, c in enumerate(data.curves)}
    n = len(pos)
    ex = [[Fraction(0)] * n for _ in range(n)]
    for lf in data.lifts:
        if lf.target_curve not in pos:
            raise UnknownLabel(f"unknown target curve {lf.target_curve!r}")
        if lf.isotopic_to is None:
            continue
        if lf.isotopic_to not in pos:
            raise UnknownLabel(f"unknown curve {lf.isotopic_to!r}")
        ex[pos[lf.isotopic_to]][pos[lf.target_curve]] += Fraction(1, lf.degree)
    return TransitionMatrix(data.curves, np.array([[float(x) for x in row] for row in ex]).reshape(n, n),
                            tuple(tuple(row) for row in ex))


def _as_matrix(m) -> np.ndarray:
    return m.entries if isinstance(m, TransitionMatrix) else np.asarray(m, dtype=float)


def _perron_irreducible(a: np.ndarray, max_iter: int, tol: float) -> float:
    """Power iteration on a + sI for an irreducible block.

    Stops when the Collatz-Wielandt bounds min(Bx/x) ≤ ρ ≤ max(Bx/x) agree
    to ``tol``; the shift makes the block primitive so x stays positive.
    """
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    B = a + SPECTRAL_SHIFT * np.eye(n)
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        y = B @ x
        ratio = y / x
        lo, hi = ratio.min(), ratio.max()
        x = y / y.sum()
        if hi - lo < tol * max(1.0, hi):
            return max(0.0, 0.5 * (lo + hi) - SPECTRAL_SHIFT)
    raise NoConvergence(f"power iteration did not settle in {max_iter} steps")


def spectral_radius(m, max_iter: int = MAX_POWER_ITER, tol: float = SPECTRAL_TOL) -> float:
    """Perron root: the largest Perron root over strongly connected blocks."""
    a = _as_matrix(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(a < 0):
        raise ValueError("matrix must be nonnegative")
    if a.shape[0] == 0 or not a.any():
        return 0.0
    ncomp, lab = connected_components(a > 0, directed=True, connection="strong")
    best = 0.0
    for c in range(ncomp):
        idx = np.flatnonzero(lab == c)
        best = max(best, _perron_irreducible(a[np.ix_(idx, idx)], max_iter, tol))
    return best


def irreducible_blocks(m) -> list[TransitionMatrix]:
    """Principal submatrices on the strongly connected components of the support digraph."""
    tm = m if isinstance(m, TransitionMatrix) else TransitionMatrix(tuple(range(len(m))), np.asarray(m, float))
    a = tm.entries
    ncomp, lab = connected_components(a > 0, directed=True, connection="strong")
    blocks = []
    for c in range(ncomp):
        idx = np.flatnonzero(lab == c)
        blocks.append(tm.submatrix(idx))
    return blocks


@dataclass
class Verdict:
    verdict: str
    spectral_radius: float
    context: str
    blocks: list
    notes: list

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "spectral_radius": self.spectral_radius, "context": self.context,
                "blocks": self.blocks, "notes": self.notes}


def classify_radius(lam: float) -> str:
    if lam < 1 - BOUNDARY_TOL:
        return "no_obstruction"
    if lam > 1 + BOUNDARY_TOL:
        return "obstruction"
    return "boundary_case"


def verdict(m, context: str = "general", connecting_arc_suspect: bool = False) -> Verdict:
    if context not in CONTEXTS:
        raise ValueError(f"context must be one of {CONTEXTS}")
    lam = spectral_radius(m)
    v = classify_radius(lam)
    notes = []
    blocks = []
    for b in irreducible_blocks(m):
        blocks.append({"labels": list(b.labels), "spectral_radius": spectral_radius(b)})
    if v == "boundary_case":
        notes.append("λ = 1 within tolerance: the matrix alone cannot tell a Levy-type cycle from "
                     "annuli inside rotation domains; geometric input is needed")
    if context == "geometrically_finite_with_accumulation" and v != "no_obstruction":
        notes.append("for a geometrically finite rational map whose postcritical set accumulates, λ ≤ 1 "
                     "with equality only in degenerate cases; "
                     + ("λ > 1 means the data cannot come from such a map"
                        if v == "obstruction" else "the data sits on the equality boundary"))
    if connecting_arc_suspect:
        notes.append("obstruction-free but connecting-arc-suspect")
    return Verdict(v, lam, context, blocks, notes)


# ---------------------------------------------------------------------------
# fixtures from concrete maps
# ---------------------------------------------------------------------------

def levy_cycle() -> CoverData:
    return CoverData(("g",), (Lift("g", "d0", 1, "g"),))


def mating_basilica_like() -> CoverData:
    """Formal mating of z²+1/4 with itself: the curve through the two zero-angle rays.

    Its preimage has one essential component, of degree 1, isotopic to itself.
    """
    return CoverData(("ray0",), (Lift("ray0", "d0", 1, "ray0"), Lift("ray0", "d1", 1, None)),
                     note="mating of z^2+1/4 with itself")


def z_squared_four_points() -> CoverData:
    """z² with P = {0, ∞, 1, -1}: a curve γ around {1, -1} pulls back to one peripheral curve."""
    return CoverData(("gamma",), (Lift("gamma", "d0", 2, None),))


def lattes_curve() -> CoverData:
    """Flexible Lattès map of degree 4: each curve class has two degree-2 lifts isotopic to it."""
    return CoverData(("h",), (Lift("h", "d0", 2, "h"), Lift("h", "d1", 2, "h")))
