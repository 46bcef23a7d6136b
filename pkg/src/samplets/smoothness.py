"""Local Hölder exponents from the decay of samplet coefficients.

Along every root-to-leaf branch the coefficient norm ``e_j`` of each cluster
is modelled as ``c * b_j ** (alpha + d/2)``, with ``b_j`` the cluster box
diameter. The slope of ``log e`` against ``log b`` is fitted by least squares
and ``alpha`` is read off it. Branches whose finest coefficient norm is
negligible relative to the whole branch are classified smooth and receive the
largest detectable exponent ``q + 1``.

Only clusters that own coefficients enter a branch record; clusters too small
to carry samplets are skipped. The root scaling coefficients measure the
overall size of the signal: they enter the reference norm of the smoothness
test but, by default, not the regression, where they would bias the root
level toward the signal mean.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

RATIO_TOL = 1e-12
EPS_DROP = 1e-13


@dataclass(frozen=True)
class BranchRecord:
    """Coefficient norms ``e`` and box diameters ``b`` along ``path``.

    ``scaling_norm`` is the norm of the root scaling coefficients when they
    are not already part of ``e[0]``.
    """

    path: np.ndarray
    e: np.ndarray
    b: np.ndarray
    scaling_norm: float = 0.0

    def __len__(self):
        return self.path.shape[0]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    levels_used: int
    smooth_flag: bool
    undefined_flag: bool
    alpha: float


class BranchData(Mapping):
    """Branch records keyed by leaf id, stored as padded per-level arrays.

    Attributes
    ----------
    leaves : ndarray, shape (L,)
    nodes : ndarray, shape (L, J+1)
        Ancestor of each leaf at each level, -1 where absent or where the
        cluster owns no coefficients.
    e, b : ndarray, shape (L, J+1)
        Coefficient norms and box diameters, 0 where ``nodes`` is -1.
    scaling_norm : float
        Norm of the root scaling coefficients not counted in ``e``.
    """

    def __init__(self, leaves, nodes, e, b, scaling_norm=0.0):
        self.leaves = leaves
        self.nodes = nodes
        self.e = e
        self.b = b
        self.scaling_norm = float(scaling_norm)
        self.valid = nodes >= 0
        self._row = {int(v): i for i, v in enumerate(leaves)}

    def __getitem__(self, leaf):
        i = self._row[int(leaf)]
        m = self.valid[i]
        return BranchRecord(self.nodes[i, m], self.e[i, m], self.b[i, m],
                            self.scaling_norm)

    def __iter__(self):
        return iter(int(v) for v in self.leaves)

    def __len__(self):
        return self.leaves.shape[0]


def node_norms(basis, coeffs, include_root_scaling=False):
    """Euclidean norm of every node's coefficient slice (0 when empty).

    The root slice starts with the scaling coefficients, which are left out
    unless ``include_root_scaling`` is set; they carry the local mean of the
    signal rather than detail.
    """
    c = np.asarray(coeffs, dtype=np.float64)
    out = np.zeros(basis.tree.n_nodes)
    owners = np.flatnonzero(basis.coef_len > 0)
    # nonempty slices partition [0, N) in order
    out[owners] = np.sqrt(np.add.reduceat(c * c, basis.coef_off[owners]))
    if not include_root_scaling:
        sl = basis.coefficient_slice(0)
        out[0] = np.linalg.norm(c[sl][basis.m_scal[0]:])
    return out


def collect_branch_data(basis, f_samplet, include_root_scaling=False):
    """Per-leaf records of cluster coefficient norms and box diameters.

    Norms and diameters are evaluated once per node and shared by all
    branches through that node. The root norm covers the root samplets
    only, unless ``include_root_scaling`` is set.
    """
    tree = basis.tree
    c = _samplet_data(f_samplet)
    e_node = node_norms(basis, c, include_root_scaling)
    scaling_norm = 0.0 if include_root_scaling else float(
        np.linalg.norm(c[:basis.m_scal[0]]))
    b_node = tree.box_diameter()
    leaves = tree.leaves()
    J = tree.depth
    anc = np.full((leaves.size, J + 1), -1, np.int64)
    cur = leaves.copy()
    lev = tree.level[leaves]
    rows = np.arange(leaves.size)
    while True:
        anc[rows, lev] = cur
        live = cur != 0
        if not live.any():
            break
        rows, cur = rows[live], tree.parent[cur[live]]
        lev = tree.level[cur]
    owns = np.zeros_like(anc, dtype=bool)
    present = anc >= 0
    owns[present] = basis.coef_len[anc[present]] > 0
    anc[~owns] = -1
    e = np.where(owns, e_node[np.maximum(anc, 0)], 0.0)
    b = np.where(owns, b_node[np.maximum(anc, 0)], 0.0)
    return BranchData(leaves, anc, e, b, scaling_norm)


def _samplet_data(f):
    from .transform import CoefficientVector
    if isinstance(f, CoefficientVector):
        if f.basis != "samplet":
            raise ValueError("expected samplet coefficients")
        return f.data
    return np.asarray(f, dtype=np.float64)


def detect_smooth_branch(rec, ratio_tol=RATIO_TOL):
    """True if the finest norm is negligible against the branch norm.

    ``rec`` is a :class:`BranchRecord` or a plain array of norms. The branch
    norm includes the record's ``scaling_norm``.
    """
    if isinstance(rec, BranchRecord):
        e, extra = np.asarray(rec.e, float), rec.scaling_norm
    else:
        e, extra = np.asarray(rec, float), 0.0
    if e.size == 0:
        raise ValueError("empty branch record")
    total = np.hypot(np.linalg.norm(e), extra)
    return bool(total == 0.0 or e[-1] / total <= ratio_tol)


def _smooth_mask(e, valid, ratio_tol, scaling_norm=0.0):
    last = valid.shape[1] - 1 - np.argmax(valid[:, ::-1], axis=1)
    e_last = e[np.arange(e.shape[0]), last]
    total = np.sqrt((e * e).sum(axis=1) + scaling_norm ** 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        return (total == 0.0) | (e_last / total <= ratio_tol)


def _fit_rows(e, b, valid, eps_drop):
    """Batched least-squares fit of log e against log b by reduced QR.

    Rows that are excluded are zeroed in both the design matrix and the
    right-hand side, which leaves each branch's solution unchanged.
    Returns slope, intercept and the number of rows used.
    """
    emax = np.where(valid, e, 0.0).max(axis=1, initial=0.0)
    keep = valid & (e > eps_drop * emax[:, None])
    used = keep.sum(axis=1)
    slope = np.full(e.shape[0], np.nan)
    intercept = np.full(e.shape[0], np.nan)
    ok = used >= 2
    if ok.any():
        k = keep[ok]
        A = np.zeros(k.shape + (2,))
        A[..., 0] = k
        A[..., 1] = np.where(k, np.log(np.where(k, b[ok], 1.0)), 0.0)
        y = np.where(k, np.log(np.where(k, e[ok], 1.0)), 0.0)
        Q, R = np.linalg.qr(A, mode="reduced")
        z = np.einsum("lji,lj->li", Q, y)
        x1 = z[:, 1] / R[:, 1, 1]
        x0 = (z[:, 0] - R[:, 0, 1] * x1) / R[:, 0, 0]
        slope[ok] = x1
        intercept[ok] = x0
    return slope, intercept, used


def fit_branch_slope(rec, eps_drop=EPS_DROP, dim=1, degree=None):
    """Least-squares decay slope of one branch record.

    ``alpha`` is ``slope - dim/2`` clamped to ``[0, degree + 1]`` (no upper
    clamp if ``degree`` is None). Fits with fewer than two usable levels are
    flagged undefined with NaN slope and alpha.
    """
    e = np.asarray(rec.e, float)[None]
    b = np.asarray(rec.b, float)[None]
    slope, icpt, used = _fit_rows(e, b, np.ones_like(e, bool), eps_drop)
    s = float(slope[0])
    undefined = bool(np.isnan(s))
    alpha = np.nan if undefined else _alpha(s, dim, degree)
    return SlopeFit(s, float(icpt[0]), int(used[0]), False, undefined,
                    float(alpha))


def _alpha(slope, dim, degree):
    hi = np.inf if degree is None else degree + 1
    return np.clip(slope - 0.5 * dim, 0.0, hi)


class _FitTable(Mapping):
    def __init__(self, leaves, slope, intercept, used, smooth, alpha):
        self.leaves = leaves
        self.slope = slope
        self.intercept = intercept
        self.used = used
        self.smooth = smooth
        self.alpha = alpha
        self._row = {int(v): i for i, v in enumerate(leaves)}

    def __getitem__(self, leaf):
        i = self._row[int(leaf)]
        s = float(self.slope[i])
        return SlopeFit(s, float(self.intercept[i]), int(self.used[i]),
                        bool(self.smooth[i]),
                        bool(np.isnan(s)), float(self.alpha[i]))

    def __iter__(self):
        return iter(int(v) for v in self.leaves)

    def __len__(self):
        return self.leaves.shape[0]


@dataclass
class SmoothnessChart:
    """Per-point exponents in original point order plus per-leaf fits."""

    alpha: np.ndarray
    slope: np.ndarray
    smooth: np.ndarray
    leaf: np.ndarray
    fits: Mapping
    degree: int
    dim: int


def compute_exponents(basis, f_samplet, ratio_tol=RATIO_TOL,
                      eps_drop=EPS_DROP, branches=None,
                      include_root_scaling=False):
    """Smoothness chart of the samplet coefficients ``f_samplet``.

    Parameters
    ----------
    basis : SampletBasis
    f_samplet : CoefficientVector or ndarray
        Output of :func:`samplets.transform.forward`.
    ratio_tol : float
        A branch is smooth when its finest norm is at most this fraction of
        the branch norm.
    eps_drop : float
        Levels with norm below ``eps_drop`` times the branch maximum are left
        out of the fit.
    branches : BranchData, optional
        Precomputed records from :func:`collect_branch_data`.
    include_root_scaling : bool
        Count the root scaling coefficients in the root norm of the fit.
        They always enter the reference norm of the smoothness test.

    Returns
    -------
    SmoothnessChart
    """
    tree = basis.tree
    q = basis.degree
    d = tree.dim
    if branches is None:
        branches = collect_branch_data(basis, f_samplet,
                                       include_root_scaling)
    smooth = _smooth_mask(branches.e, branches.valid, ratio_tol,
                          branches.scaling_norm)
    slope = np.full(len(branches), np.nan)
    intercept = np.full(len(branches), np.nan)
    used = np.zeros(len(branches), np.int64)
    rows = ~smooth
    if rows.any():
        s, c, u = _fit_rows(branches.e[rows], branches.b[rows],
                            branches.valid[rows], eps_drop)
        slope[rows], intercept[rows], used[rows] = s, c, u
    slope[smooth] = q + 1 + 0.5 * d
    alpha = _alpha(slope, d, q)
    alpha[smooth] = q + 1
    fits = _FitTable(branches.leaves, slope, intercept, used, smooth, alpha)

    # broadcast leaf values to points, then back to original order
    row_of_leaf = np.zeros(tree.n_nodes, np.int64)
    row_of_leaf[branches.leaves] = np.arange(len(branches))
    pleaf = tree.point_leaf()
    prow = row_of_leaf[pleaf]
    N = tree.n_points
    out = {}
    for name, arr in (("alpha", alpha), ("slope", slope), ("smooth", smooth),
                      ("leaf", branches.leaves)):
        vals = np.empty(N, dtype=arr.dtype)
        vals[tree.perm] = arr[prow]
        out[name] = vals
    return SmoothnessChart(out["alpha"], out["slope"], out["smooth"],
                           out["leaf"], fits, q, d)


def threshold_chart(chart, t):
    """Mask of points whose branch slope falls below ``t``.

    Branches without a defined slope count as flagged.
    """
    return ~(chart.slope >= t)


def save_chart(path, ps, chart):
    """CSV rows ``x_1,...,x_d,value,alpha,slope,smooth_flag``."""
    d = ps.dim
    header = ",".join([f"x_{m + 1}" for m in range(d)]
                      + ["value", "alpha", "slope", "smooth_flag"])
    table = np.column_stack([ps.coords, ps.values, chart.alpha, chart.slope,
                             chart.smooth.astype(np.float64)])
    fmt = ["%.17g"] * (d + 3) + ["%d"]
    np.savetxt(path, table, fmt=fmt, delimiter=",", header=header,
               comments="# ")


def save_mask(path, ps, mask):
    """CSV rows ``x_1,...,x_d,mask`` or, for image input, a PGM (255 = set)."""
    if str(path).endswith(".pgm"):
        from .pointset import write_pgm
        if ps.image_shape is None:
            raise ValueError("PGM mask output needs gridded image input")
        write_pgm(path, 255 * mask.reshape(ps.image_shape).astype(np.int64))
        return
    table = np.column_stack([ps.coords, mask.astype(np.float64)])
    fmt = ["%.17g"] * ps.dim + ["%d"]
    np.savetxt(path, table, fmt=fmt, delimiter=",")


def alpha_heatmap(chart, image_shape):
    """8-bit gray image, linear in alpha over ``[0, q + 1]``."""
    a = np.nan_to_num(chart.alpha, nan=0.0)
    img = 255.0 * a / (chart.degree + 1)
    return np.clip(np.rint(img), 0, 255).astype(np.int64).reshape(image_shape)
