# %% [markdown]
# # How far is J from a contraction?
#
# For a smooth planar norm the duality map J sends the unit sphere onto the
# dual sphere.  It is 1-Lipschitz exactly when the norm is Euclidean; the
# excess measures how non-Euclidean the ball is.

# %%
from __future__ import annotations

import numpy as np

from normlab import (
    EllipseGauge,
    LpGauge,
    TrigPolyGauge,
    contraction_defect,
    dual_gauge,
    duality_map,
    sin_power_gauge,
)

# %%
gauges = {
    "ellipse": EllipseGauge(0.8, 0.6, 0.3),
    "1 + 0.05 sin^2(2t)": TrigPolyGauge(1.025, (0.0, -0.025)),
    "l4": LpGauge(4),
}
for name, g in gauges.items():
    est = contraction_defect(g, samples=4000, seed=0)
    print(f"{name:20s} defect {est.value:.9f}  witness angles {est.witnessAngles}")

# %% [markdown]
# The l4 value is 3: near the diagonal the ball is flattest relative to its
# dual.  The perturbed circle lands on 29/21.

# %%
s = 2 ** -0.25
print("J_l4 at the diagonal point:", duality_map(LpGauge(4), [s, s]), "expected", 2 ** -0.75)

# %% [markdown]
# Dualising twice returns the profile, as long as the dual is resolved by the
# trigonometric fit.

# %%
g = sin_power_gauge(0.05, 2, 2)
d = dual_gauge(g, 64)
dd = dual_gauge(d.fit, 64)
phi = np.linspace(0, np.pi, 512, endpoint=False)
print("fit residual", d.residual, " |g** - g| =", np.max(np.abs(dd.exact(phi) - g(phi))))
