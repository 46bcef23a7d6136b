# %% [markdown]
# Wall-clock cost over a ladder of 1D problem sizes. Each doubling of N
# should roughly double the time.

# %%
from samplets.cli import doubling_ratios, run_bench

rows = run_bench([100000, 200000, 400000, 800000], dim=1, degree=4)
for n, build, fit in rows:
    print(f"N={n:>7d}  tree+basis+transform {build:.3f} s  fit {fit:.3f} s")
for rb, rf in doubling_ratios(rows):
    print(f"ratio per doubling: build {rb:.2f}, fit {rf:.2f}")
