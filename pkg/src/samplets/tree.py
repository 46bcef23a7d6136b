"""Balanced 2^d-trees by dyadic subdivision of a cubified bounding box.

Nodes are stored in depth-first pre-order (node 0 is the root), so a node's
descendants occupy the id range ``[v, v + subtree_size)`` and a node's
children appear in increasing id order, which is also the order of their
point ranges. Points are reordered so that every cluster is a contiguous
range ``[begin, end)`` of the tree permutation.

Tree order sorts points by their dyadic cell sequence (Morton order) and
breaks ties lexicographically by coordinates. Both keys depend only on the
geometry, so shuffling input rows yields the identical tree.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .pointset import AxisBox, bounding_box

#: Resolution of the integer cell coordinates, in bits per axis. Points that
#: share a cell at this resolution cannot be separated by dyadic splits.
COORD_BITS = 52


class StructureError(ValueError):
    """Raised when points do not have the structure a builder requires."""


def num_monomials(q, d):
    """Number of monomials of total degree <= ``q`` in ``d`` variables."""
    return comb(q + d, d)


def default_leaf_capacity(q, d):
    """Twice the number of moment conditions, so leaves can carry samplets."""
    return 2 * num_monomials(q, d)


@dataclass(frozen=True)
class Cluster:
    id: int
    level: int
    begin: int
    end: int
    box: AxisBox
    children: tuple

    @property
    def size(self):
        return self.end - self.begin

    @property
    def is_leaf(self):
        return not self.children


class ClusterTree:
    """Array representation of a cluster tree.

    Attributes
    ----------
    perm : ndarray of int, shape (N,)
        ``perm[p]`` is the original index of the point at tree position p.
    level, begin, end, parent : ndarray of int, shape (n_nodes,)
        Per-node level, point range and parent id (-1 for the root).
    cell : ndarray of int, shape (n_nodes, d)
        Integer cell index of each node at its own level.
    child_ptr, child_idx : ndarray of int
        CSR adjacency; children of v are ``child_idx[child_ptr[v]:child_ptr[v+1]]``.
    """

    def __init__(self, box, perm, level, begin, end, parent, cell):
        self.box = box
        self.dim = box.dim
        self.edge = float(box.edges[0])
        self.perm = perm
        self.level = level
        self.begin = begin
        self.end = end
        self.parent = parent
        self.cell = cell
        n_nodes = level.shape[0]
        counts = np.bincount(parent[1:], minlength=n_nodes)
        self.child_ptr = np.concatenate([[0], np.cumsum(counts)])
        self.child_idx = np.argsort(parent[1:], kind="stable") + 1
        self.depth = int(level.max())

    @property
    def n_nodes(self):
        return self.level.shape[0]

    @property
    def n_points(self):
        return self.perm.shape[0]

    @property
    def size(self):
        return self.end - self.begin

    @property
    def n_children(self):
        return np.diff(self.child_ptr)

    def children(self, v):
        return self.child_idx[self.child_ptr[v]:self.child_ptr[v + 1]]

    def is_leaf(self):
        return self.n_children == 0

    def leaves(self):
        return np.flatnonzero(self.n_children == 0)

    def cell_edge(self, nodes=None):
        lev = self.level if nodes is None else self.level[nodes]
        return self.edge * np.exp2(-lev.astype(np.float64))

    def box_lower(self, nodes=None):
        cell = self.cell if nodes is None else self.cell[nodes]
        h = self.cell_edge(nodes)
        return self.box.lower + cell * h[:, None]

    def box_diameter(self, nodes=None):
        """Diameter of the dyadic node boxes, edge * 2^-level * sqrt(d)."""
        return self.cell_edge(nodes) * np.sqrt(self.dim)

    def node(self, v):
        lower = self.box_lower(np.array([v]))[0]
        h = self.edge * 2.0 ** (-int(self.level[v]))
        return Cluster(int(v), int(self.level[v]), int(self.begin[v]),
                       int(self.end[v]), AxisBox(lower, lower + h),
                       tuple(int(c) for c in self.children(v)))

    def point_leaf(self):
        """Leaf id for every tree position."""
        leaves = self.leaves()
        return np.repeat(leaves, self.size[leaves])

    def inverse_perm(self):
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.shape[0])
        return inv

    def same_as(self, other):
        """Node-by-node structural equality, including boxes and ordering."""
        return (self.dim == other.dim
                and np.array_equal(self.box.lower, other.box.lower)
                and np.array_equal(self.box.upper, other.box.upper)
                and all(np.array_equal(getattr(self, a), getattr(other, a))
                        for a in ("perm", "level", "begin", "end", "parent",
                                  "cell")))

    def dump(self):
        """Indented text listing of the tree: id, level, range, box."""
        lines = []
        lower = self.box_lower()
        h = self.cell_edge()
        for v in range(self.n_nodes):
            lo = ", ".join(f"{x:.6g}" for x in lower[v])
            hi = ", ".join(f"{x:.6g}" for x in lower[v] + h[v])
            lines.append(f"{'  ' * int(self.level[v])}{v} L{self.level[v]} "
                         f"[{self.begin[v]}, {self.end[v]}) "
                         f"box=[({lo}), ({hi})]")
        return "\n".join(lines) + "\n"


def _integer_coords(coords, box, bits):
    t = (coords - box.lower) / float(box.edges[0])
    ic = np.floor(t * 2.0 ** bits)
    np.clip(ic, 0, 2 ** bits - 1, out=ic)
    return ic.astype(np.int64)


def _morton_words(ic, bits):
    """Interleave integer coordinates into uint64 words, coarsest level first."""
    n, d = ic.shape
    per_word = 64 // d
    words = []
    u = ic.astype(np.uint64)
    for start in range(0, bits, per_word):
        w = np.zeros(n, dtype=np.uint64)
        for lev in range(start, min(start + per_word, bits)):
            shift = np.uint64(bits - 1 - lev)
            for m in range(d):
                w = (w << np.uint64(1)) | ((u[:, m] >> shift) & np.uint64(1))
        words.append(w)
    return words


def _concat_ranges(begin, length):
    total = int(length.sum())
    offs = np.cumsum(length) - length
    return np.repeat(begin - offs, length) + np.arange(total)


def build_tree(ps, leaf_capacity, max_level=None):
    """Build the 2^d-tree of ``ps`` by top-down dyadic subdivision.

    A node is split while it holds more than ``leaf_capacity`` points and its
    level is below ``max_level``. Empty children are dropped. A point on a
    splitting hyperplane goes to the upper child.
    """
    if leaf_capacity < 1:
        raise ValueError("leaf_capacity must be >= 1")
    box = bounding_box(ps)
    bits = COORD_BITS
    lmax = bits if max_level is None else max(0, min(int(max_level), bits))
    coords = ps.coords
    n, d = coords.shape
    ic = _integer_coords(coords, box, bits)
    keys = [coords[:, m] for m in range(d - 1, -1, -1)]
    keys += _morton_words(ic, bits)[::-1]
    perm = np.lexsort(keys)
    ic = ic[perm]

    levels = [np.zeros(1, np.int64)]
    begins = [np.zeros(1, np.int64)]
    ends = [np.full(1, n, np.int64)]
    parents = [np.full(1, -1, np.int64)]
    seg_b, seg_e, seg_id = begins[0], ends[0], np.zeros(1, np.int64)
    next_id = 1
    j = 0
    while seg_b.size:
        split = (seg_e - seg_b > leaf_capacity)
        if j >= lmax or not split.any():
            break
        sb, se, sid = seg_b[split], seg_e[split], seg_id[split]
        pos = _concat_ranges(sb, se - sb)
        digit = ic[pos] >> (bits - 1 - j)
        owner = np.repeat(np.arange(sb.size), se - sb)
        new = np.ones(pos.size, dtype=bool)
        new[1:] = (owner[1:] != owner[:-1]) | np.any(digit[1:] != digit[:-1],
                                                     axis=1)
        starts = np.flatnonzero(new)
        cb = pos[starts]
        stops = np.append(starts[1:], pos.size)
        ce = pos[stops - 1] + 1
        cid = next_id + np.arange(cb.size)
        next_id += cb.size
        levels.append(np.full(cb.size, j + 1, np.int64))
        begins.append(cb)
        ends.append(ce)
        parents.append(sid[owner[starts]])
        seg_b, seg_e, seg_id = cb, ce, cid
        j += 1

    level = np.concatenate(levels)
    begin = np.concatenate(begins)
    end = np.concatenate(ends)
    parent_bfs = np.concatenate(parents)
    order = np.lexsort((level, begin))
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    level, begin, end = level[order], begin[order], end[order]
    parent = parent_bfs[order]
    parent[1:] = rank[parent[1:]]
    cell = ic[begin] >> (bits - level)[:, None]
    return ClusterTree(box, perm, level, begin, end, parent, cell)


def build_tree_gridded(ps, level):
    """Bottom-up tree for points filling a full ``2^level``-per-axis grid.

    Each point is bucketed into one of the ``2^(level*d)`` congruent cells of
    the bounding box, then groups of ``2^d`` cells are merged per parent. The
    result equals ``build_tree(ps, 1, max_level=level)`` node by node; the
    cost is linear in the number of points.
    """
    J = int(level)
    box = bounding_box(ps)
    n, d = ps.coords.shape
    B = 2 ** d
    if J < 0 or J * d > 62:
        raise StructureError(f"unsupported grid level {J} in dimension {d}")
    if n != B ** J:
        raise StructureError(
            f"{n} points cannot fill a 2^{J} grid in dimension {d}")
    ic = _integer_coords(ps.coords, box, J)
    code = np.zeros(n, dtype=np.int64)
    for lev in range(J):
        for m in range(d):
            code = (code << 1) | ((ic[:, m] >> (J - 1 - lev)) & 1)
    occupancy = np.bincount(code, minlength=B ** J)
    if occupancy.max() != 1:
        bad = int(np.argmax(occupancy != 1))
        raise StructureError(
            f"grid cell {bad} holds {occupancy[bad]} points, expected 1")
    perm = np.empty(n, dtype=np.int64)
    perm[code] = np.arange(n)

    # pre-order id of node (j, k): sum over its digits c_i of 1 + c_i * S_i,
    # S_i = size of a subtree rooted at level i
    subtree = [(B ** (J - i + 1) - 1) // (B - 1) for i in range(J + 1)]
    n_nodes = subtree[0]
    lev_a = np.empty(n_nodes, np.int64)
    beg_a = np.empty(n_nodes, np.int64)
    end_a = np.empty(n_nodes, np.int64)
    par_a = np.empty(n_nodes, np.int64)
    cell_a = np.empty((n_nodes, d), np.int64)
    prev_ids = None
    ids = np.zeros(1, np.int64)
    for j in range(J + 1):
        k = np.arange(B ** j, dtype=np.int64)
        if j > 0:
            ids = prev_ids[k >> d] + 1 + (k & (B - 1)) * subtree[j]
        span = B ** (J - j)
        lev_a[ids] = j
        beg_a[ids] = k * span
        end_a[ids] = (k + 1) * span
        par_a[ids] = prev_ids[k >> d] if j > 0 else -1
        cell = np.zeros((k.size, d), np.int64)
        for i in range(j):
            digit = (k >> (d * (j - 1 - i))) & (B - 1)
            for m in range(d):
                cell[:, m] = (cell[:, m] << 1) | ((digit >> (d - 1 - m)) & 1)
        cell_a[ids] = cell
        prev_ids = ids
    return ClusterTree(box, perm, lev_a, beg_a, end_a, par_a, cell_a)


@dataclass(frozen=True)
class Diameter:
    value: float
    exact: bool


def cluster_diameter(tree, node, ps, cutoff=512):
    """Diameter of cluster ``node``.

    Exact maximal pairwise distance for clusters of at most ``cutoff``
    points, otherwise the dyadic box diameter (an upper bound). The
    ``exact`` flag tells which one was returned.
    """
    b, e = int(tree.begin[node]), int(tree.end[node])
    if e - b > cutoff:
        return Diameter(float(tree.box_diameter(np.array([node]))[0]), False)
    if e - b < 2:
        return Diameter(0.0, True)
    pts = ps.coords[tree.perm[b:e]]
    best = 0.0
    for i in range(pts.shape[0] - 1):
        dist = np.sqrt(((pts[i + 1:] - pts[i]) ** 2).sum(axis=1)).max()
        best = max(best, float(dist))
    return Diameter(best, True)
