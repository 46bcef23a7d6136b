# %% [markdown]
# Two 2D functions on a 512 x 512 grid: the ridge |x - y| and a function
# with a direction-dependent jump at (0.25, 0.25) and a cone-like kink at
# (0.75, 0.75).

# %%
import numpy as np

import samplets
from samplets.signals import synth

for name in ("corner2d", "singular2d"):
    ps = synth(name, 4 ** 9)
    res = samplets.analyze(ps, degree=2, gridded=True)
    a = res.chart.alpha.reshape(ps.image_shape)
    print(name, {k: round(v, 2) for k, v in res.timings.items()})
    for p in ((0.25, 0.25), (0.5, 0.5), (0.75, 0.75), (0.2, 0.8)):
        i, j = (int(c * 512) for c in p[::-1])
        print(f"   alpha near {p}: {a[i, j]:.2f}")

# %%
# the ridge decays like b^2: slope 2, alpha 1 on the diagonal
ps = synth("corner2d", 4 ** 9)
res = samplets.analyze(ps, degree=2, gridded=True)
on = ps.coords[:, 0] == ps.coords[:, 1]
print("median slope on the diagonal:", np.median(res.chart.slope[on]))
