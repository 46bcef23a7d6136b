import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from samplets import (PointSet, StructureError, build_tree, build_tree_gridded,
                      cluster_diameter, default_leaf_capacity, num_monomials)
from samplets.pointset import image_to_points


def _check_structure(tree, ps):
    n = tree.n_points
    assert np.array_equal(np.sort(tree.perm), np.arange(n))
    assert tree.begin[0] == 0 and tree.end[0] == n
    assert np.all(tree.end > tree.begin)
    for v in range(tree.n_nodes):
        kids = tree.children(v)
        if kids.size:
            assert 1 <= kids.size <= 2 ** tree.dim
            assert np.all(tree.level[kids] == tree.level[v] + 1)
            assert tree.begin[kids[0]] == tree.begin[v]
            assert tree.end[kids[-1]] == tree.end[v]
            assert np.array_equal(tree.begin[kids[1:]], tree.end[kids[:-1]])
    # leaf ranges in pre-order partition [0, N)
    lv = tree.leaves()
    assert tree.begin[lv[0]] == 0 and tree.end[lv[-1]] == n
    assert np.array_equal(tree.begin[lv[1:]], tree.end[lv[:-1]])
    # every point lies in its node box, child boxes nest in parent boxes
    lo = tree.box_lower()
    h = tree.cell_edge()
    for v in range(tree.n_nodes):
        pts = ps.coords[tree.perm[tree.begin[v]:tree.end[v]]]
        slack = 1e-12 * tree.edge
        assert np.all(pts >= lo[v] - slack) and np.all(pts <= lo[v] + h[v]
                                                       + slack)
        if v:
            p = tree.parent[v]
            assert np.all(lo[v] >= lo[p]) and np.all(lo[v] + h[v]
                                                     <= lo[p] + h[p] + slack)
    diam = tree.box_diameter()
    assert np.allclose(diam[1:], diam[tree.parent[1:]] / 2, rtol=1e-15)


def test_four_quadrant_centers():
    pts = [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]]
    ps = PointSet(pts, np.arange(4.0))
    t = build_tree(ps, 1)
    assert t.n_nodes == 5 and t.depth == 1
    assert t.children(0).size == 4
    assert np.all(t.size[1:] == 1)
    _check_structure(t, ps)


def test_uniform_grid_balanced():
    J = 7
    x = (np.arange(2 ** J) + 0.5) / 2 ** J
    ps = PointSet(x, x)
    t = build_tree(ps, 1)
    assert t.depth == J
    for j in range(J + 1):
        assert np.all(t.size[t.level == j] * 2 ** j == 2 ** J)
    _check_structure(t, ps)


def test_diagonal_drops_empty_quadrants():
    x = (np.arange(8) + 0.5) / 8
    ps = PointSet(np.column_stack([x, x]), x)
    t = build_tree(ps, 1)
    assert t.depth == 3
    assert np.all(t.n_children[~t.is_leaf()] == 2)
    assert t.n_nodes == 1 + 2 + 4 + 8
    # kept quadrants are the lower-left and upper-right ones
    kids = t.children(0)
    np.testing.assert_array_equal(t.cell[kids], [[0, 0], [1, 1]])


def test_split_plane_goes_to_upper_child():
    ps = PointSet([0.0, 0.5, 1.0], [0.0, 0.0, 0.0])
    t = build_tree(ps, 1)
    kids = t.children(0)
    assert list(t.size[kids]) == [1, 2]
    assert ps.coords[t.perm[t.begin[kids[1]]], 0] == 0.5


def test_leaf_capacity_and_max_level(rng):
    ps = PointSet(rng.random((500, 2)), np.zeros(500))
    t = build_tree(ps, 12)
    leaf = t.is_leaf()
    assert np.all(t.size[leaf] <= 12)
    assert np.all(t.size[~leaf] > 12)
    _check_structure(t, ps)
    t2 = build_tree(ps, 1, max_level=3)
    assert t2.depth == 3
    with pytest.raises(ValueError):
        build_tree(ps, 0)


def test_default_capacity():
    assert num_monomials(4, 1) == 5
    assert num_monomials(2, 2) == 6
    assert default_leaf_capacity(2, 3) == 20


@given(st.integers(1, 3), st.integers(1, 120), st.integers(1, 9),
       st.integers(0, 2 ** 32 - 1))
def test_structure_and_order_independence(d, n, cap, seed):
    rng = np.random.default_rng(seed)
    # coarse lattice to provoke coordinate ties and split-plane points
    pts = np.unique(rng.integers(0, 9, (n, d)) / 8.0, axis=0)
    ps = PointSet(pts, rng.standard_normal(pts.shape[0]))
    t = build_tree(ps, cap)
    _check_structure(t, ps)
    p = rng.permutation(ps.count)
    t2 = build_tree(ps.permuted(p), cap)
    assert np.array_equal(t2.level, t.level)
    assert np.array_equal(t2.begin, t.begin)
    assert np.array_equal(t2.cell, t.cell)
    # same points in the same tree positions
    assert np.array_equal(p[t2.perm], t.perm)


def _grid(side, d=2):
    t = (np.arange(side) + 0.5) / side
    mesh = np.meshgrid(*([t] * d), indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def test_gridded_four_by_four():
    pts = _grid(4)
    ps = PointSet(pts, pts[:, 0])
    t = build_tree_gridded(ps, 2)
    assert t.leaves().size == 16
    assert np.sum(t.level == 1) == 4 and np.sum(t.level == 0) == 1
    _check_structure(t, ps)


@pytest.mark.parametrize("side,d", [(8, 2), (32, 2), (16, 1), (4, 3)])
def test_gridded_matches_top_down(side, d, rng):
    pts = _grid(side, d)[rng.permutation(side ** d)]
    ps = PointSet(pts, rng.standard_normal(len(pts)))
    J = int(np.log2(side))
    a = build_tree_gridded(ps, J)
    b = build_tree(ps, 1, max_level=J)
    assert a.same_as(b)
    assert b.same_as(build_tree(ps, 1))


def test_gridded_image_points():
    ps = image_to_points(np.zeros((16, 16)))
    assert build_tree_gridded(ps, 4).same_as(build_tree(ps, 1))


def test_gridded_rejects_non_grids(rng):
    with pytest.raises(StructureError):
        build_tree_gridded(PointSet(rng.random((15, 2)), np.zeros(15)), 2)
    pts = rng.random((16, 2))
    with pytest.raises(StructureError):
        build_tree_gridded(PointSet(pts, np.zeros(16)), 2)


def test_cluster_diameter():
    ps = PointSet([0.0, 1.0], [0.0, 0.0])
    t = build_tree(ps, 2)
    d = cluster_diameter(t, 0, ps)
    assert d.value == 1.0 and d.exact
    single = PointSet([[0.2, 0.4]], [0.0])
    assert cluster_diameter(build_tree(single, 1), 0, single).value == 0.0


def test_cluster_diameter_brute_force(rng):
    ps = PointSet(rng.random((100, 2)), np.zeros(100))
    t = build_tree(ps, 10)
    for v in range(t.n_nodes):
        pts = ps.coords[t.perm[t.begin[v]:t.end[v]]]
        diff = pts[:, None, :] - pts[None, :, :]
        brute = np.sqrt((diff ** 2).sum(-1)).max()
        got = cluster_diameter(t, v, ps)
        assert got.exact and got.value == brute
    big = cluster_diameter(t, 0, ps, cutoff=50)
    assert not big.exact
    assert big.value == pytest.approx(t.box_diameter()[0])


def test_node_and_dump():
    ps = PointSet([[0.25, 0.25], [0.75, 0.75]], [0.0, 1.0])
    t = build_tree(ps, 1)
    root = t.node(0)
    assert root.size == 2 and root.children == (1, 2) and not root.is_leaf
    assert t.node(1).is_leaf
    text = t.dump()
    assert text.splitlines() == [
        "0 L0 [0, 2) box=[(0.25, 0.25), (0.75, 0.75)]",
        "  1 L1 [0, 1) box=[(0.25, 0.25), (0.5, 0.5)]",
        "  2 L1 [1, 2) box=[(0.5, 0.5), (0.75, 0.75)]",
    ]
    inv = t.inverse_perm()
    assert np.array_equal(t.perm[inv], np.arange(2))
