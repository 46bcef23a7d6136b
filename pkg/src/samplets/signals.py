"""Closed-form test signals and samplers for them."""
from __future__ import annotations

import numpy as np

from .pointset import PointSet, image_to_points


def f1(x):
    """Piecewise signal on [-1, 1] with jumps, corners and a kink in f''.

    Jumps at -0.4 and 0.55, corners at -0.35, -0.25, -0.15 and -0.05, a
    second-derivative jump at 0.7. Pieces are half-open at the breakpoints.
    """
    x = np.asarray(x, dtype=np.float64)
    conds = [x < -0.4,
             (x >= -0.4) & (x < -0.35),
             (x >= -0.35) & (x < -0.15),
             (x >= -0.15) & (x < -0.05),
             (x >= -0.05) & (x < 0.55),
             x >= 0.55]
    funcs = [lambda t: np.full_like(t, 6.0),
             lambda t: 0.1 * np.abs(20 * t + 9) + 6,
             lambda t: 0.1 * np.abs(20 * t + 5) + 6,
             lambda t: 0.1 * np.abs(20 * t + 1) + 6,
             lambda t: 6 + np.sin(20 * np.pi * t),
             lambda t: 4 - 20 * np.abs(t - 0.7) * (t - 0.7)]
    return np.piecewise(x, conds, funcs)


F1_JUMPS = (-0.4, 0.55)
F1_CORNERS = (-0.35, -0.25, -0.15, -0.05)
F1_KINKS = (0.7,)


def corner2d(x, y):
    """h(x, y) = |x - y|."""
    return np.abs(np.asarray(x) - np.asarray(y))


def singular2d(x, y):
    """Sum of a direction-dependent jump at (0.25, 0.25) and a non-smooth
    cone at (0.75, 0.75), halved.

    Both singular points evaluate to the limit along the degenerate set: the
    second term is 0 at (0.75, 0.75), the first term is taken as 0 at
    (0.25, 0.25), where it has no limit.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx1, dy1 = x - 0.25, y - 0.25
    r1 = np.sqrt(dx1 * dx1 + dy1 * dy1)
    dx2, dy2 = x - 0.75, y - 0.75
    r2 = dx2 * dx2 + dy2 * dy2
    with np.errstate(invalid="ignore", divide="ignore"):
        t1 = np.where(r1 > 0, dy1 / np.where(r1 > 0, r1, 1.0), 0.0)
        t2 = np.where(r2 > 0, dx2 * dx2 * dy2 / np.where(r2 > 0, r2, 1.0),
                      0.0)
    return 0.5 * (t1 + t2)


def sphere_pattern(p):
    """Three-term azimuthal/polar pattern on the unit sphere."""
    p = np.asarray(p, dtype=np.float64)
    theta = np.arctan2(p[:, 1], p[:, 0])
    phi = np.arccos(np.clip(p[:, 2], -1.0, 1.0))
    return (0.5 * np.sin(3 * theta) * np.sin(2 * phi)
            + 0.3 * np.cos(2 * theta) * np.cos(phi)
            + 0.2 * np.sin(4 * theta) * np.sin(phi) ** 2)


def sphere_heaviside(p):
    """Heaviside of :func:`sphere_pattern`, with H(0) = 1."""
    return np.heaviside(sphere_pattern(p), 1.0)


def random_polynomial(rng, dim, degree):
    """Callable polynomial of total degree <= ``degree`` with N(0,1) coefs."""
    from .basis import monomial_exponents
    exps = monomial_exponents(degree, dim)
    coefs = rng.standard_normal(exps.shape[0])

    def p(x):
        x = np.atleast_2d(x)
        out = np.zeros(x.shape[0])
        for c, a in zip(coefs, exps):
            out += c * np.prod(x ** a, axis=1)
        return out
    return p


def ellipse_phantom(size):
    """Piecewise-constant image of nested ellipses with values in [0, 1].

    Returns an array of shape (size, size); row index is y.
    """
    t = (np.arange(size) + 0.5) / size
    yy, xx = np.meshgrid(t, t, indexing="ij")
    # (center x, center y, semi-axis x, semi-axis y, rotation, intensity)
    ellipses = [(0.5, 0.5, 0.42, 0.46, 0.0, 1.0),
                (0.5, 0.5, 0.39, 0.43, 0.0, -0.8),
                (0.61, 0.52, 0.08, 0.2, -0.3, -0.2),
                (0.39, 0.52, 0.11, 0.25, 0.3, -0.2),
                (0.5, 0.32, 0.1, 0.1, 0.0, 0.3),
                (0.5, 0.74, 0.05, 0.05, 0.0, 0.3),
                (0.45, 0.8, 0.04, 0.02, 0.0, 0.3)]
    img = np.zeros((size, size))
    for cx, cy, ax, ay, rot, val in ellipses:
        c, s = np.cos(rot), np.sin(rot)
        u = (xx - cx) * c + (yy - cy) * s
        v = -(xx - cx) * s + (yy - cy) * c
        img[(u / ax) ** 2 + (v / ay) ** 2 <= 1.0] += val
    return np.clip(img, 0.0, 1.0)


def _grid_side(n):
    side = int(round(np.sqrt(n)))
    if side * side == n and side & (side - 1) == 0:
        return side
    return None


def uniform_sphere(rng, n):
    g = rng.standard_normal((n, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


SIGNALS = ("f1", "corner2d", "singular2d", "sphere_heaviside", "poly",
           "phantom")


def synth(name, n, seed=0, degree=2, dim=2):
    """Sample a named signal at ``n`` sites, deterministically per ``seed``.

    ``f1`` uses uniform random sites on [-1, 1]. The 2D signals use the
    pixel-center grid when ``n`` is the square of a power of two and uniform
    random sites in the unit square otherwise. ``sphere_heaviside`` samples
    the sphere uniformly. ``poly`` draws a random polynomial of total degree
    ``degree`` on ``[0, 1]^dim``. ``phantom`` needs a dyadic square ``n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    if name == "f1":
        x = rng.uniform(-1.0, 1.0, n)
        return PointSet(x[:, None], f1(x))
    if name in ("corner2d", "singular2d", "phantom"):
        side = _grid_side(n)
        if name == "phantom":
            if side is None:
                raise ValueError("phantom needs n = 4^k")
            return image_to_points(ellipse_phantom(side))
        fn = corner2d if name == "corner2d" else singular2d
        if side is not None:
            t = (np.arange(side) + 0.5) / side
            yy, xx = np.meshgrid(t, t, indexing="ij")
            ps = image_to_points(fn(xx, yy))
            return ps
        pts = rng.random((n, 2))
        return PointSet(pts, fn(pts[:, 0], pts[:, 1]))
    if name == "sphere_heaviside":
        pts = uniform_sphere(rng, n)
        return PointSet(pts, sphere_heaviside(pts))
    if name == "poly":
        pts = rng.random((n, dim))
        p = random_polynomial(rng, dim, degree)
        return PointSet(pts, p(pts))
    raise ValueError(f"unknown signal {name!r}; choose from {SIGNALS}")
