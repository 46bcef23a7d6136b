"""Fast samplet transform and its inverse.

Both sweeps touch every filter once, so the cost is linear in the number of
points for bounded cluster fan-in. Values enter and leave in original point
order; the tree permutation is applied internally.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class CoefficientVector:
    """Length-N coefficients tagged with their basis.

    ``dirac`` vectors are point values in original point order; ``samplet``
    vectors follow the basis coefficient layout.
    """

    data: np.ndarray
    basis: str

    def __post_init__(self):
        if self.basis not in ("dirac", "samplet"):
            raise ValueError(f"unknown basis tag {self.basis!r}")
        self.data = np.asarray(self.data, dtype=np.float64)

    def __len__(self):
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


def _unwrap(f, expected, n):
    if isinstance(f, CoefficientVector):
        if f.basis != expected:
            raise ValueError(f"expected a {expected} vector, got {f.basis}")
        f = f.data
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (n,):
        raise ValueError(f"vector of shape {f.shape} does not match basis "
                         f"with {n} points")
    return f


def forward(basis, f_dirac):
    """Samplet coefficients ``T f`` of point values ``f_dirac``."""
    tree = basis.tree
    N = tree.n_points
    f = _unwrap(f_dirac, "dirac", N)
    z = np.zeros(basis.work_size)
    z[:N] = f[tree.perm]
    for g in basis.groups:
        x = z[g.in_idx]
        z[g.out_idx] = np.matmul(x[:, None, :], g.Q)[:, 0, :]
    return CoefficientVector(z[basis.coef_base:].copy(), "samplet")


def inverse(basis, f_samplet):
    """Point values ``T^T c`` (original order) of samplet coefficients."""
    tree = basis.tree
    N = tree.n_points
    c = _unwrap(f_samplet, "samplet", N)
    z = np.zeros(basis.work_size)
    z[basis.coef_base:] = c
    for g in reversed(basis.groups):
        y = z[g.out_idx]
        z[g.in_idx] = np.matmul(g.Q, y[:, :, None])[:, :, 0]
    out = np.empty(N)
    out[tree.perm] = z[:N]
    return CoefficientVector(out, "dirac")


def save_coefficients(path, coeffs):
    """Write ``index,value`` rows."""
    data = np.asarray(coeffs)
    table = np.column_stack([np.arange(data.shape[0]), data])
    np.savetxt(path, table, fmt=["%d", "%.17g"], delimiter=",",
               header="index,value", comments="# ")
