# %% [markdown]
# Smoothness chart of a 1D test signal with two jumps, four corners, a
# second-derivative kink and an oscillating smooth part.

# %%
import numpy as np

import samplets
from samplets.signals import F1_CORNERS, F1_JUMPS, F1_KINKS, synth

ps = synth("f1", 100000, seed=0)
res = samplets.analyze(ps, degree=4)  # q + 1 = 5 vanishing moments
for stage, sec in res.timings.items():
    print(f"{stage:>10s}: {sec:.3f} s")

# %%
chart, tree = res.chart, res.tree
lv = chart.fits.leaves
lo = tree.box_lower(lv)[:, 0]
hi = lo + tree.cell_edge(lv)


def alpha_near(x0):
    i = np.flatnonzero((lo <= x0) & (x0 < hi))[0]
    return chart.fits.alpha[i]


for kind, locs in (("jump", F1_JUMPS), ("corner", F1_CORNERS),
                   ("kink", F1_KINKS)):
    for x0 in locs:
        print(f"{kind:>6s} at {x0:+.2f}: alpha = {alpha_near(x0):.2f}")

# -0.25 sits at 3/8 of the box [-1, 1], a dyadic split point: no cluster
# straddles it, so it reads as smooth

# %%
# coarse text plot of alpha over [-1, 1]
bins = np.linspace(-1, 1, 81)
idx = np.digitize(ps.coords[:, 0], bins) - 1
row = "".join(str(int(np.floor(chart.alpha[idx == k].min())))
              for k in range(80))
print(row)
