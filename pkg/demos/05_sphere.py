# %% [markdown]
# A step function on the unit sphere: the Heaviside of a three-term
# azimuthal/polar pattern, sampled at uniform random sites. Low exponents
# should trace the zero set of the pattern.

# %%
import numpy as np

import samplets
from samplets.signals import sphere_pattern, synth

ps = synth("sphere_heaviside", 200000, seed=0)
res = samplets.analyze(ps, degree=2)
print({k: round(v, 3) for k, v in res.timings.items()})

# %%
g = np.abs(sphere_pattern(ps.coords))
low = res.chart.alpha < 0.5
print(f"{low.mean():.1%} of the sites get alpha < 0.5")
print("median |pattern| there:", np.median(g[low]))
print("median |pattern| elsewhere:", np.median(g[~low]))
