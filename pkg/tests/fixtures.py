"""Shared geometric fixtures."""
import numpy as np

N_LOOP = 720


def _loop(fn, n=N_LOOP):
    th = 2 * np.pi * np.arange(n) / n
    return fn(th)


def star(radius, amp, k, phase=0.0, center=0j):
    return lambda th: center + radius * (1 + amp * np.cos(k * th + phase)) * np.exp(1j * th)


def ellipse(a, b, tilt=0.0, center=0j):
    return lambda th: center + np.exp(1j * tilt) * (a * np.cos(th) + 1j * b * np.sin(th))


def image_of_circle(f, radius, center=0j):
    return lambda th: f(center + radius * np.exp(1j * th))


# (inner loop, outer loop, z0) for annuli of modulus comfortably above 5 log 2 / 2π
DISTORTED_ANNULI = {
    "star3": (star(1.0, 0.2, 3), star(60.0, 0.1, 5, 0.4), 0j),
    "star5_offset": (star(1.0, 0.15, 5, 0.0, 0.3), star(80.0, 0.2, 4), 0.3 + 0j),
    "ellipse_in": (ellipse(2.0, 0.6), star(70.0, 0.05, 2), 0j),
    "ellipse_both": (ellipse(1.0, 0.5, 0.3), ellipse(90.0, 50.0, -0.2), 0j),
    "thin_inner": (ellipse(3.0, 0.2), star(120.0, 0.1, 3), 0j),
    "quadratic_image": (image_of_circle(lambda z: z + 0.004 * z * z, 1.0),
                        image_of_circle(lambda z: z + 0.004 * z * z, 100.0), 0j),
    "cubic_image": (image_of_circle(lambda z: z + 1e-5 * z ** 3, 1.0),
                    image_of_circle(lambda z: z + 1e-5 * z ** 3, 150.0), 0j),
    "shifted_outer": (star(1.0, 0.1, 4), star(60.0, 0.05, 3, 0.0, 15.0), 0j),
    "square_ish": (star(1.5, 0.06, 4), star(100.0, 0.06, 4, np.pi / 4), 0j),
    "big_ratio": (star(1.0, 0.25, 6), ellipse(900.0, 700.0, 0.5), 0j),
}


def distorted_annulus(name):
    from pinchlab.moduli import AnnulusRegion
    fi, fo, z0 = DISTORTED_ANNULI[name]
    return AnnulusRegion.sampled(_loop(fi), _loop(fo), z0), z0
