# %% [markdown]
# Samplet transform basics: build a basis on scattered 2D sites, check that
# it is orthonormal, and see how few coefficients a smooth signal needs.

# %%
import numpy as np

import samplets

rng = np.random.default_rng(0)
pts = rng.random((2000, 2))
f = np.exp(-3 * ((pts - 0.4) ** 2).sum(axis=1))
ps = samplets.PointSet(pts, f)

q = 2  # q + 1 = 3 vanishing moments
tree = samplets.build_tree(ps, samplets.default_leaf_capacity(q, 2))
basis = samplets.build_basis(tree, ps, q)
print(f"{tree.n_nodes} clusters, depth {tree.depth}")

# %%
# dense matrix of the basis, only for small N
T = samplets.assemble_dense_transform(basis)
print("max |T T^T - I|:", np.abs(T @ T.T - np.eye(ps.count)).max())

# %%
c = samplets.forward(basis, f)
back = samplets.inverse(basis, c)
print("roundtrip error:", np.abs(back.data - f).max())
print("norms:", np.linalg.norm(f), np.linalg.norm(c.data))

# %%
# smooth data: energy sits in few coefficients
mag = np.sort(np.abs(c.data))[::-1]
for k in (10, 50, 200, 1000):
    tail = np.sqrt((mag[k:] ** 2).sum()) / np.linalg.norm(f)
    print(f"keeping {k:4d} coefficients leaves relative error {tail:.1e}")

# %%
# a quadratic is annihilated by every samplet
quad = 1 + pts[:, 0] - 2 * pts[:, 0] * pts[:, 1] + pts[:, 1] ** 2
cq = samplets.forward(basis, quad).data
print("largest samplet coefficient of a quadratic:",
      np.abs(cq[basis.m_scal[0]:]).max())
