"""Raster pictures of Julia sets: escape time for polynomials, backward-orbit density otherwise."""
from __future__ import annotations

import re
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dynamics import escape_radius, preimages
from .errors import IoError
from .sphere import RationalMap

INTERIOR = (18, 22, 60)


def _grid(width: int, height: int, viewport: Sequence[float]) -> np.ndarray:
    x0, x1, y0, y1 = map(float, viewport)
    if not (x1 > x0 and y1 > y0) or width < 1 or height < 1:
        raise ValueError("viewport and image size must be nonempty")
    xs = x0 + (np.arange(width) + 0.5) * (x1 - x0) / width
    ys = y1 - (np.arange(height) + 0.5) * (y1 - y0) / height    # row 0 at the top
    return xs[None, :] + 1j * ys[:, None]


def _palette(t: np.ndarray) -> np.ndarray:
    """t in [0, 1] -> RGB."""
    r = np.clip(255 * (0.5 + 0.5 * np.cos(2 * np.pi * (t + 0.00))), 0, 255)
    g = np.clip(255 * (0.5 + 0.5 * np.cos(2 * np.pi * (t + 0.33))), 0, 255)
    b = np.clip(255 * (0.5 + 0.5 * np.cos(2 * np.pi * (t + 0.67))), 0, 255)
    return np.stack([r, g, b], axis=-1).astype(np.uint8)


def escape_time_image(f: RationalMap, width: int, height: int, viewport, max_iter: int = 256) -> np.ndarray:
    z = _grid(width, height, viewport)
    R = escape_radius(f)
    n = np.full(z.shape, -1, dtype=np.int32)
    num = np.asarray(f.N / f.D[0])[::-1]
    alive = np.ones(z.shape, dtype=bool)
    w = z.copy()
    for k in range(max_iter):
        wa = w[alive]
        wa = np.polyval(num, wa)
        w[alive] = wa
        out = np.abs(w) > R
        newly = alive & out
        n[newly] = k
        alive &= ~out
        if not alive.any():
            break
    img = np.empty(z.shape + (3,), dtype=np.uint8)
    img[:] = INTERIOR
    esc = n >= 0
    img[esc] = _palette(np.log1p(n[esc]) / np.log1p(max_iter))
    return img


def density_image(f: RationalMap, width: int, height: int, viewport, points: int = 200_000,
                  chains: int = 256, seed: int = 0, burn_in: int = 50) -> np.ndarray:
    from .pinch_path import _seed_point
    rng = np.random.default_rng(seed)
    z = np.full(chains, _seed_point(f), dtype=complex)
    x0, x1, y0, y1 = map(float, viewport)
    hist = np.zeros((height, width))
    steps = burn_in + max(1, points // chains)
    for k in range(steps):
        w = preimages(f, z)
        z = w[np.arange(chains), rng.integers(0, f.degree, size=chains)]
        if k < burn_in:
            continue
        ok = np.isfinite(z) & (z.real >= x0) & (z.real < x1) & (z.imag >= y0) & (z.imag < y1)
        i = ((y1 - z.imag[ok]) / (y1 - y0) * height).astype(int)
        j = ((z.real[ok] - x0) / (x1 - x0) * width).astype(int)
        np.add.at(hist, (np.clip(i, 0, height - 1), np.clip(j, 0, width - 1)), 1)
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:] = INTERIOR
    hit = hist > 0
    img[hit] = _palette(0.15 + 0.7 * np.log1p(hist[hit]) / np.log1p(hist.max()))
    return img


def render_julia(f: RationalMap, width: int, height: int, viewport, out_path=None, max_iter: int = 256,
                 seed: int = 0) -> np.ndarray:
    img = (escape_time_image(f, width, height, viewport, max_iter) if f.is_polynomial
           else density_image(f, width, height, viewport, seed=seed))
    if out_path is not None:
        write_image(img, out_path)
    return img


def write_image(img: np.ndarray, path) -> Path:
    """Binary PPM, or PNG when the suffix asks for it and Pillow is installed."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".png":
            try:
                from PIL import Image
            except ImportError as exc:
                raise IoError("PNG output needs Pillow; use a .ppm path") from exc
            Image.fromarray(img, "RGB").save(path, format="PNG")
        else:
            h, w, _ = img.shape
            with open(path, "wb") as fh:
                fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
                fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P6\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise ValueError("not a binary PPM")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data[m.end(): m.end() + w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def scalar_image(values: np.ndarray, vmin: Optional[float] = None, vmax: Optional[float] = None,
                 mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Grey-scale picture of a real field; masked cells are drawn in the interior colour."""
    v = np.asarray(values, dtype=float)
    lo = np.nanmin(v) if vmin is None else vmin
    hi = np.nanmax(v) if vmax is None else vmax
    t = np.clip((v - lo) / (hi - lo if hi > lo else 1.0), 0, 1)
    g = (255 * t).astype(np.uint8)
    img = np.stack([g, g, g], axis=-1)
    if mask is not None:
        img[mask] = INTERIOR
    return img
