"""End-to-end analysis: tree, basis, transform and exponent chart."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .basis import build_basis
from .smoothness import EPS_DROP, RATIO_TOL, compute_exponents
from .transform import forward
from .tree import build_tree, build_tree_gridded, default_leaf_capacity


@dataclass
class Analysis:
    """Everything produced by :func:`analyze`.

    ``timings`` holds wall-clock seconds for the stages ``tree/basis``,
    ``transform`` and ``fit``.
    """

    tree: object
    basis: object
    coefficients: object
    chart: object
    timings: dict = field(default_factory=dict)


def dyadic_grid_level(ps):
    """Level ``J`` if ``ps`` came from a square ``2^J x 2^J`` image, else None."""
    if ps.image_shape is None:
        return None
    h, w = ps.image_shape
    if h != w or h & (h - 1):
        return None
    return int(h).bit_length() - 1


def analyze(ps, degree, leaf_capacity=None, gridded=False,
            ratio_tol=RATIO_TOL, eps_drop=EPS_DROP,
            include_root_scaling=False):
    """Run the full smoothness analysis of the values attached to ``ps``.

    Parameters
    ----------
    ps : PointSet
    degree : int
        Polynomial degree ``q``; samplets get ``q + 1`` vanishing moments.
    leaf_capacity : int, optional
        Defaults to twice the number of monomials of degree ``<= q``.
    gridded : bool
        Build the tree bottom-up; needs a square dyadic image grid.

    Returns
    -------
    Analysis
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    t0 = time.perf_counter()
    if gridded:
        level = dyadic_grid_level(ps)
        if level is None:
            raise ValueError("gridded build needs a square 2^J image grid")
        tree = build_tree_gridded(ps, level)
    else:
        cap = leaf_capacity or default_leaf_capacity(degree, ps.dim)
        tree = build_tree(ps, cap)
    basis = build_basis(tree, ps, degree)
    t1 = time.perf_counter()
    coeffs = forward(basis, ps.values)
    t2 = time.perf_counter()
    chart = compute_exponents(basis, coeffs, ratio_tol, eps_drop,
                              include_root_scaling=include_root_scaling)
    t3 = time.perf_counter()
    timings = {"tree/basis": t1 - t0, "transform": t2 - t1, "fit": t3 - t2}
    return Analysis(tree, basis, coeffs, chart, timings)


def leaf_values_constant(tree, values):
    """Per-leaf flag: all sample values inside the leaf are equal."""
    v = np.asarray(values)[tree.perm]
    lv = tree.leaves()
    lo = np.minimum.reduceat(v, tree.begin[lv])
    hi = np.maximum.reduceat(v, tree.begin[lv])
    return lo == hi
