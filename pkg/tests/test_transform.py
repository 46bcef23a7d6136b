import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from samplets import (CoefficientVector, PointSet, assemble_dense_transform,
                      build_basis, build_tree, forward, inverse,
                      samplet_weights)
from samplets.signals import random_polynomial
from samplets.transform import save_coefficients

from conftest import random_points


def _basis(rng, n, d, q, cap=None):
    ps = random_points(rng, n, d)
    return ps, build_basis(build_tree(ps, cap or 2 * (q + 2) ** d), ps, q)


def test_constant_vector(rng):
    ps, b = _basis(rng, 500, 2, 2)
    c = forward(b, np.ones(500)).data
    m = b.m_scal[0]
    assert np.abs(c[m:]).max() < 1e-12
    assert np.linalg.norm(c[:m]) == pytest.approx(np.sqrt(500))


@pytest.mark.parametrize("d,q", [(1, 0), (1, 4), (2, 2), (3, 1)])
def test_polynomial_has_no_samplet_content(d, q, rng):
    ps = random_points(rng, 800, d)
    b = build_basis(build_tree(ps, 3 * (q + 1) ** d), ps, q)
    f = random_polynomial(rng, d, q)(ps.coords)
    c = forward(b, f).data
    assert np.abs(c[b.m_scal[0]:]).max() <= 1e-10 * np.linalg.norm(f)


def test_matches_dense_oracle(rng):
    ps, b = _basis(rng, 256, 2, 1)
    T = assemble_dense_transform(b)
    f = rng.standard_normal(256)
    c = forward(b, f).data
    tree_f = f[b.tree.perm]
    np.testing.assert_allclose(c, T @ tree_f, atol=1e-10)
    back = inverse(b, CoefficientVector(c, "samplet")).data
    np.testing.assert_allclose(back[b.tree.perm], T.T @ c, atol=1e-10)


def test_roundtrip_large():
    rng = np.random.default_rng(0)
    ps = PointSet(rng.random(100000), rng.standard_normal(100000))
    b = build_basis(build_tree(ps, 10), ps, 4)
    c = forward(b, ps.values)
    assert np.abs(inverse(b, c).data - ps.values).max() <= 1e-10


def test_unit_vector_gives_weights(rng):
    ps, b = _basis(rng, 120, 2, 1)
    for k in (0, 5, 60, 119):
        e = np.zeros(120)
        e[k] = 1.0
        vals = inverse(b, e).data
        pos, w = samplet_weights(b, k, original_order=True)
        expect = np.zeros(120)
        expect[pos] = w
        np.testing.assert_allclose(vals, expect, atol=1e-14)


def test_zero_vector(rng):
    ps, b = _basis(rng, 50, 1, 2)
    assert not inverse(b, np.zeros(50)).data.any()
    assert not forward(b, np.zeros(50)).data.any()


@given(st.integers(1, 3), st.integers(1, 300), st.integers(0, 4),
       st.integers(0, 2 ** 32 - 1))
def test_parseval_and_linearity(d, n, q, seed):
    rng = np.random.default_rng(seed)
    ps, b = _basis(rng, n, d, q, cap=int(rng.integers(1, 20)))
    f, g = rng.standard_normal((2, n))
    cf, cg = forward(b, f).data, forward(b, g).data
    assert abs(np.linalg.norm(cf) - np.linalg.norm(f)) \
        <= 1e-12 * np.linalg.norm(f)
    lin = forward(b, 2.5 * f - 0.5 * g).data
    np.testing.assert_allclose(lin, 2.5 * cf - 0.5 * cg, atol=1e-12)
    np.testing.assert_allclose(inverse(b, cf).data, f, atol=1e-12)


def test_tags_and_sizes(rng):
    ps, b = _basis(rng, 40, 1, 1)
    c = forward(b, ps.values)
    assert c.basis == "samplet" and len(c) == 40
    with pytest.raises(ValueError):
        forward(b, c)
    with pytest.raises(ValueError):
        inverse(b, CoefficientVector(ps.values, "dirac"))
    with pytest.raises(ValueError):
        forward(b, np.zeros(39))
    with pytest.raises(ValueError):
        CoefficientVector(np.zeros(3), "fourier")
    assert np.asarray(c).shape == (40,)


def test_save_coefficients(tmp_path):
    p = tmp_path / "c.csv"
    save_coefficients(p, np.array([0.5, -1e-20]))
    rows = np.loadtxt(p, delimiter=",")
    np.testing.assert_array_equal(rows, [[0, 0.5], [1, -1e-20]])
