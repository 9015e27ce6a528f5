# %% [markdown]
# # John ellipses, tangent ellipses and contraction certificates

# %%
from __future__ import annotations

import numpy as np

from normlab import (
    LpGauge,
    TrigPolyGauge,
    contact_set,
    inner_ellipsoid_at,
    john_ellipse,
    outer_ellipsoid_at,
    sigma_bisector_closure,
    st_certificate,
)
from normlab.errors import NoOuterEllipsoid

g = TrigPolyGauge(1.025, (0.0, -0.025))

# %%
E = john_ellipse(g)
print("John shape\n", E.shape)
print("contacts", contact_set(g, E).angles)
print("bisector closure", sigma_bisector_closure(g).to_dict()["closed"])

# %% [markdown]
# Tangent ellipses at a sphere point: the inner one fits inside the ball, the
# outer one contains it, both touching at x.

# %%
x = g.boundary(0.0)
print("inner b", inner_ellipsoid_at(g, x).b, " outer b", outer_ellipsoid_at(g, x).b)

# %% [markdown]
# At an axis point of l4 the curvature vanishes, so no ellipse through that
# point can contain the ball.

# %%
try:
    outer_ellipsoid_at(LpGauge(4), np.array([1.0, 0.0]))
except NoOuterEllipsoid as exc:
    print("l4 axis:", exc)
print("l4 diagonal outer shape\n", outer_ellipsoid_at(LpGauge(4), LpGauge(4).boundary(np.pi / 4)).shape)

# %% [markdown]
# A certificate maps one sphere point to another through the outer ellipse at
# the source and the inner ellipse at the target, so it is a contraction.

# %%
c = st_certificate(g, g.boundary(0.3), g.boundary(2.0))
print("T =\n", c.T, "\nmax sampled norm", c.maxSampledNorm)
