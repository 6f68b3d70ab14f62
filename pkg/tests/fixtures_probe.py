"""Independent oracle for preimage diameters of a chordal disk under z^2 + c."""
import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist


def _embed(z):
    d = 1 + np.abs(z) ** 2
    return np.stack([2 * z.real / d, 2 * z.imag / d, (np.abs(z) ** 2 - 1) / d], 1)


def _diameter(z):
    P = _embed(z)
    try:
        P = P[ConvexHull(P).vertices]
    except Exception:
        pass
    return pdist(P).max()


def _chordal_circle(center, rho, n):
    # along each ray z = center + s e the chordal condition is a quadratic in s
    e = np.exp(2j * np.pi * np.arange(n) / n)
    k = rho * rho * (1 + abs(center) ** 2)
    a, b, c = 4 - k, -2 * k * (np.conj(center) * e).real, -k * (1 + abs(center) ** 2)
    s = (-b + np.sqrt(b * b - 4 * a * c)) / (2 * a)
    return center + s * e


def _lift(loop, c):
    w = np.sqrt(loop - c + 0j)
    for k in range(1, len(w)):      # continue the branch along the loop
        if abs(w[k] + w[k - 1]) < abs(w[k] - w[k - 1]):
            w[k] = -w[k]
    return [w, -w]


def chordal_circle_preimage_diameters(c, center, rho, depth, n=4096):
    loops = [_chordal_circle(center, rho, n)]
    out = []
    for _ in range(depth):
        loops = [l for L in loops for l in _lift(L, c)]
        out.append(max(_diameter(l) for l in loops))
    return out
