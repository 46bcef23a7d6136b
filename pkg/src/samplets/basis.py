"""Samplet bases on cluster trees.

Every node combines the scaling distributions of its children (the Dirac
distributions of its points at a leaf) with an orthogonal filter matrix
``Q = [Q_scal | Q_samp]``, obtained from the Householder QR factorization of
the transposed moment matrix. Samplet columns are orthogonal to all rows of
the moment matrix and therefore annihilate polynomials of total degree
``<= q``.

Moments are taken against monomials centered at the node box midpoint and
scaled by half the box edge. Only leaves touch raw coordinates; moments of a
node's scaling distributions are read off the triangular factor and carried to
the parent frame by an exact binomial change of variables.

Coefficient layout
------------------
Node ``v`` owns the contiguous slice ``coef_off[v] : coef_off[v] + coef_len[v]``
of the coefficient vector. Slices follow the depth-first pre-order of the tree,
so the coefficients of any subtree form one contiguous block. The root slice
holds the root scaling coefficients first, then the root samplets.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from itertools import product
from math import comb

import numpy as np

from .tree import _concat_ranges, num_monomials

DENSE_CUTOFF = 4096


def monomial_exponents(q, d):
    """Exponents of all monomials of total degree <= q, graded-lex order."""
    out = []
    for deg in range(q + 1):
        block = [a for a in product(range(deg + 1), repeat=d) if sum(a) == deg]
        out.extend(sorted(block, reverse=True))
    return np.array(out, dtype=np.int64).reshape(-1, d)


def vandermonde(u, exps):
    """Monomials ``u^alpha`` for every row of ``u`` and every exponent row."""
    n, d = u.shape
    q = int(exps.max()) if exps.size else 0
    out = np.ones((n, exps.shape[0]))
    for m in range(d):
        pw = np.ones((q + 1, n))
        for p in range(1, q + 1):
            pw[p] = pw[p - 1] * u[:, m]
        out *= pw[exps[:, m]].T
    return out


def shift_matrix(exps, signs):
    """Change of monomial frame from a child box to its parent box.

    For child coordinates ``u`` and parent coordinates ``(u + s) / 2`` with
    ``s`` in {-1, +1}^d, returns ``S`` with ``(parent monomials) = S @
    (child monomials)``.
    """
    m = exps.shape[0]
    S = np.zeros((m, m))
    for a in range(m):
        alpha = exps[a]
        for b in range(m):
            beta = exps[b]
            if np.any(beta > alpha):
                continue
            coef = 0.5 ** int(alpha.sum())
            for k in range(exps.shape[1]):
                coef *= comb(int(alpha[k]), int(beta[k])) \
                    * float(signs[k]) ** int(alpha[k] - beta[k])
            S[a, b] = coef
    return S


def raw_moment_matrix(points, center, half_edge, exps):
    """Moment matrix of Dirac distributions at ``points``, shape (m_q, n)."""
    u = (np.atleast_2d(points) - center) / half_edge
    return vandermonde(u, exps).T


@dataclass
class FilterPair:
    """Filters of one node and the moments of its scaling distributions."""

    q_scaling: np.ndarray
    q_samplet: np.ndarray
    moments: np.ndarray

    @property
    def matrix(self):
        return np.hstack([self.q_scaling, self.q_samplet])


def _qr_filters(mt):
    """Complete QR of a stack of transposed moment matrices, (G, n, m_q).

    Returns ``Q`` (G, n, n) and ``R`` (G, n, m_q) with ``R``'s diagonal made
    nonnegative.
    """
    Q, R = np.linalg.qr(mt, mode="complete")
    k = min(mt.shape[1], mt.shape[2])
    diag = np.diagonal(R, axis1=1, axis2=2)[:, :k]
    sign = np.where(diag < 0, -1.0, 1.0)
    Q[:, :, :k] *= sign[:, None, :]
    R[:, :k, :] *= sign[:, :, None]
    return Q, R


def compute_filters(M):
    """Filter pair of a single moment matrix ``M`` of shape (m_q, n)."""
    M = np.asarray(M, dtype=np.float64)
    m_q, n = M.shape
    Q, R = _qr_filters(M.T[None])
    m_scal = min(n, m_q)
    return FilterPair(Q[0, :, :m_scal], Q[0, :, m_scal:],
                      R[0, :m_scal, :].T)


@dataclass
class _Group:
    """Nodes on one level with equal input count, processed as one batch."""

    level: int
    leaf: bool
    nodes: np.ndarray
    n: int
    m_scal: int
    Q: np.ndarray
    in_idx: np.ndarray
    out_idx: np.ndarray


class SampletBasis:
    """Samplet basis of degree ``q`` on a cluster tree.

    Index space of the transform work vector: tree-ordered point values at
    ``[0, N)``, scaling coefficients of non-root nodes at
    ``N + scal_off[v] + [0, m_scal[v])``, samplet-basis coefficients at
    ``coef_base + [0, N)``.
    """

    def __init__(self, tree, degree, exps, n_in, m_scal, scal_off, moments,
                 groups):
        self.tree = tree
        self.degree = degree
        self.exps = exps
        self.n_in = n_in
        self.m_scal = m_scal
        self.m_samp = n_in - m_scal
        self.scal_off = scal_off
        self.moments = moments
        self.groups = groups
        N = tree.n_points
        self.coef_len = self.m_samp.copy()
        self.coef_len[0] = n_in[0]
        self.coef_off = np.concatenate([[0], np.cumsum(self.coef_len)[:-1]])
        self.coef_base = N + int(m_scal.sum())
        self.work_size = self.coef_base + N
        self._locate = {}
        for gi, g in enumerate(groups):
            for pos, v in enumerate(g.nodes):
                self._locate[int(v)] = (gi, pos)
        assert int(self.coef_len.sum()) == N

    @property
    def n_points(self):
        return self.tree.n_points

    @property
    def n_moments(self):
        return self.exps.shape[0]

    def coefficient_slice(self, v):
        b = int(self.coef_off[v])
        return slice(b, b + int(self.coef_len[v]))

    def owner(self, k):
        """Node whose slice holds coefficient ``k``."""
        if not 0 <= k < self.n_points:
            raise IndexError(f"coefficient index {k} out of range")
        v = int(np.searchsorted(self.coef_off, k, side="right")) - 1
        while self.coef_len[v] == 0:
            v -= 1
        return v

    def filters(self, v):
        gi, pos = self._locate[int(v)]
        g = self.groups[gi]
        Q = g.Q[pos]
        return FilterPair(Q[:, :g.m_scal], Q[:, g.m_scal:],
                          self.scaling_moments(v))

    def scaling_moments(self, v):
        """Moments of node ``v``'s scaling distributions, (m_q, m_scal)."""
        b = int(self.scal_off[v])
        return self.moments[b:b + int(self.m_scal[v])].T

    def box_frame(self, v):
        """Center and half edge of the monomial frame of node ``v``."""
        lower = self.tree.box_lower(np.array([v]))[0]
        h = self.tree.edge * 2.0 ** (-int(self.tree.level[v]))
        return lower + 0.5 * h, 0.5 * h


def _child_signs(d):
    return np.array([[2 * ((s >> (d - 1 - m)) & 1) - 1 for m in range(d)]
                     for s in range(2 ** d)], dtype=np.float64)


def build_basis(tree, ps, degree):
    """Construct the samplet basis of ``degree`` q on ``tree``.

    Nodes are processed level by level from the deepest level up; all nodes
    of a level sharing input count and leaf status are factored as one batch.
    """
    q = int(degree)
    if q < 0:
        raise ValueError("degree must be >= 0")
    d = tree.dim
    N = tree.n_points
    exps = monomial_exponents(q, d)
    m_q = exps.shape[0]
    n_nodes = tree.n_nodes
    is_leaf = tree.is_leaf()
    level = tree.level

    shifts = np.stack([shift_matrix(exps, s) for s in _child_signs(d)])
    # octant of each node inside its parent, axis 0 most significant
    octant = np.zeros(n_nodes, np.int64)
    for m in range(d):
        octant = (octant << 1) | (tree.cell[:, m] & 1)

    # leaf-frame monomials at every tree position
    pleaf = tree.point_leaf()
    center, half = _frames(tree, pleaf)
    V = vandermonde((ps.coords[tree.perm] - center) / half[:, None], exps)

    n_in = np.where(is_leaf, tree.size, 0).astype(np.int64)
    m_scal = np.zeros(n_nodes, np.int64)
    scal_off = np.zeros(n_nodes, np.int64)
    room = int(np.minimum(tree.size, m_q).sum())
    moments = np.empty((room, m_q))
    row_octant = np.empty(room, np.int64)
    n_rows = 0
    pending = []
    for j in range(tree.depth, -1, -1):
        nodes = np.flatnonzero(level == j)
        internal = nodes[~is_leaf[nodes]]
        if internal.size:
            kids = _children_of(tree, internal)
            n_in[internal] = np.add.reduceat(m_scal[kids],
                                             _kid_starts(tree, internal))
            kid_rows = _concat_ranges(scal_off[kids], m_scal[kids])
            chunk = np.zeros(n_nodes, np.int64)
            chunk[internal] = np.cumsum(n_in[internal]) - n_in[internal]
            src = moments[kid_rows]
            so = row_octant[kid_rows]
            shifted = np.empty_like(src)
            for s in range(shifts.shape[0]):
                sel = so == s
                if sel.any():
                    shifted[sel] = src[sel] @ shifts[s].T
        for leaf_flag in (True, False):
            members = nodes[is_leaf[nodes] == leaf_flag]
            if not members.size:
                continue
            counts = n_in[members]
            for n in np.unique(counts):
                n = int(n)
                gnodes = members[counts == n]
                if leaf_flag:
                    in_idx = tree.begin[gnodes][:, None] + np.arange(n)
                    mt = V[in_idx]
                else:
                    loc = chunk[gnodes][:, None] + np.arange(n)
                    mt = shifted[loc]
                    in_idx = N + kid_rows[loc]
                Q, R = _qr_filters(mt)
                ms = min(n, m_q)
                m_scal[gnodes] = ms
                scal_off[gnodes] = n_rows + ms * np.arange(gnodes.size)
                stop = n_rows + ms * gnodes.size
                moments[n_rows:stop] = R[:, :ms, :].reshape(-1, m_q)
                row_octant[n_rows:stop] = np.repeat(octant[gnodes], ms)
                n_rows = stop
                pending.append((j, leaf_flag, gnodes, n, ms, Q, in_idx))

    # coefficient layout: per-node slices in pre-order, root slice holds all
    # of its outputs
    coef_len = n_in - m_scal
    coef_len[0] = n_in[0]
    coef_off = np.cumsum(coef_len) - coef_len
    coef_base = N + n_rows
    groups = []
    for j, leaf_flag, gnodes, n, ms, Q, in_idx in pending:
        out_idx = np.empty((gnodes.size, n), np.int64)
        out_idx[:, :ms] = N + scal_off[gnodes][:, None] + np.arange(ms)
        out_idx[:, ms:] = (coef_base + coef_off[gnodes][:, None]
                           + np.arange(n - ms))
        root = gnodes == 0
        if root.any():
            out_idx[root] = coef_base + np.arange(n)
        groups.append(_Group(j, leaf_flag, gnodes, n, ms, Q, in_idx, out_idx))
    return SampletBasis(tree, q, exps, n_in, m_scal, scal_off,
                        moments[:n_rows], groups)


def _children_of(tree, nodes):
    starts = tree.child_ptr[nodes]
    lens = tree.child_ptr[nodes + 1] - starts
    return tree.child_idx[_concat_ranges(starts, lens)]


def _kid_starts(tree, nodes):
    lens = tree.child_ptr[nodes + 1] - tree.child_ptr[nodes]
    return np.concatenate([[0], np.cumsum(lens)[:-1]])


def _frames(tree, nodes):
    h = tree.cell_edge(nodes)
    center = tree.box_lower(nodes) + 0.5 * h[:, None]
    return center, 0.5 * h


def moment_matrix(basis_or_tree, node, ps=None, degree=None):
    """Moment matrix of the distributions entering ``node``, (m_q, n).

    With a :class:`SampletBasis`, internal nodes use the children's stored
    scaling moments shifted to the node frame. With a tree, ``ps`` and
    ``degree``, leaves are evaluated from the raw points.
    """
    if isinstance(basis_or_tree, SampletBasis):
        basis = basis_or_tree
        tree = basis.tree
        exps = basis.exps
    else:
        basis = None
        tree = basis_or_tree
        exps = monomial_exponents(int(degree), tree.dim)
    kids = tree.children(node)
    if kids.size == 0:
        if ps is None:
            raise ValueError("leaf moments need the point set")
        center, half = (basis.box_frame(node) if basis is not None
                        else _single_frame(tree, node))
        b, e = int(tree.begin[node]), int(tree.end[node])
        return raw_moment_matrix(ps.coords[tree.perm[b:e]], center, half,
                                 exps)
    if basis is None:
        raise ValueError("internal nodes need a basis with child moments")
    signs = _child_signs(tree.dim)
    blocks = []
    for c in kids:
        oc = 0
        for m in range(tree.dim):
            oc = (oc << 1) | int(tree.cell[c, m] & 1)
        blocks.append(shift_matrix(exps, signs[oc]) @ basis.scaling_moments(c))
    return np.hstack(blocks)


def _single_frame(tree, node):
    c, h = _frames(tree, np.array([node]))
    return c[0], float(h[0])


# ---------------------------------------------------------------------------
# explicit expansions (testing oracles)


def _scaling_weights(basis, v, cache=None):
    """Dirac weights of node ``v``'s scaling distributions, (#v, m_scal)."""
    F = _input_weights(basis, v, cache) @ basis.filters(v).q_scaling
    return F


def _input_weights(basis, v, cache=None):
    tree = basis.tree
    kids = tree.children(v)
    size = int(tree.size[v])
    if kids.size == 0:
        return np.eye(size)
    cols = [_scaling_weights(basis, c, cache) if cache is None
            else cache.pop(int(c)) for c in kids]
    out = np.zeros((size, sum(c.shape[1] for c in cols)))
    r = c0 = 0
    for block in cols:
        out[r:r + block.shape[0], c0:c0 + block.shape[1]] = block
        r += block.shape[0]
        c0 += block.shape[1]
    return out


def samplet_weights(basis, k, original_order=False):
    """Dirac weights of the ``k``-th basis distribution.

    Returns ``(positions, weights)``; positions are tree positions (original
    point indices with ``original_order=True``) and span the owning
    cluster's point range.
    """
    v = basis.owner(k)
    local = k - int(basis.coef_off[v])
    fp = basis.filters(v)
    cols = np.hstack([fp.q_scaling, fp.q_samplet]) if v == 0 else fp.q_samplet
    w = _input_weights(basis, v) @ cols[:, local]
    tree = basis.tree
    pos = np.arange(int(tree.begin[v]), int(tree.end[v]))
    if original_order:
        pos = tree.perm[pos]
    return pos, w


def assemble_dense_transform(basis, cutoff=DENSE_CUTOFF):
    """Dense orthogonal matrix T with ``f_samplet = T @ f_dirac`` (tree order).

    Row k holds the Dirac weights of basis distribution k. Assembled by
    cascading filter products from the leaves to the root.
    """
    tree = basis.tree
    N = tree.n_points
    if N > cutoff:
        raise ValueError(f"N = {N} exceeds the dense oracle cutoff {cutoff}")
    T = np.zeros((N, N))
    cache = {}
    for v in range(tree.n_nodes - 1, -1, -1):
        fp = basis.filters(v)
        B = _input_weights(basis, v, cache)
        b, e = int(tree.begin[v]), int(tree.end[v])
        sl = basis.coefficient_slice(v)
        if v == 0:
            T[sl, b:e] = (B @ fp.matrix).T
        else:
            T[sl, b:e] = (B @ fp.q_samplet).T
            cache[v] = B @ fp.q_scaling
    return T


# ---------------------------------------------------------------------------
# binary filter dump


def dump_filters(basis, path):
    """Write per-node filters, little-endian.

    Per node in id order: int64 node id, int64 m_scal, int64 m_samp, then
    the n x m_scal scaling filter and the n x m_samp samplet filter, both
    row-major float64.
    """
    with open(path, "wb") as fh:
        for v in range(basis.tree.n_nodes):
            fp = basis.filters(v)
            fh.write(struct.pack("<qqq", v, fp.q_scaling.shape[1],
                                 fp.q_samplet.shape[1]))
            fh.write(np.ascontiguousarray(fp.q_scaling, "<f8").tobytes())
            fh.write(np.ascontiguousarray(fp.q_samplet, "<f8").tobytes())


def load_filters(path):
    """Read a filter dump back into ``{node: (q_scaling, q_samplet)}``."""
    out = {}
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0
    while pos < len(data):
        v, ms, mw = struct.unpack_from("<qqq", data, pos)
        pos += 24
        n = ms + mw
        qs = np.frombuffer(data, "<f8", n * ms, pos).reshape(n, ms)
        pos += 8 * n * ms
        qw = np.frombuffer(data, "<f8", n * mw, pos).reshape(n, mw)
        pos += 8 * n * mw
        out[v] = (qs.copy(), qw.copy())
    return out


__all__ = ["SampletBasis", "FilterPair", "build_basis", "compute_filters",
           "moment_matrix", "raw_moment_matrix", "monomial_exponents",
           "shift_matrix", "samplet_weights", "assemble_dense_transform",
           "dump_filters", "load_filters", "num_monomials"]
