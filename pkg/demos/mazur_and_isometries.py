# %% [markdown]
# # Mazur maps and the isometry gap of l_p^n

# %%
from __future__ import annotations

from normlab.isometry import gap_bound, min_gap
from normlab.mazur import mazur_lipschitz, swap_pair_ratio

# %% [markdown]
# The Mazur map from the l_q sphere to the l_p sphere is (q/p)-Lipschitz, and
# swapped pairs near the diagonal attain that constant.

# %%
for p, q in [(2, 3), (2, 4), (1.5, 3), (3, 4)]:
    est = mazur_lipschitz(p, q, n=2, samples=2000)
    d = 2 ** (-1 / q)
    print(f"p={p} q={q}: estimate {est.value:.6f}  q/p {q / p:.6f}  swap pair {swap_pair_ratio(p, q, d + 1e-4):.6f}")

# %% [markdown]
# Signed permutations are the isometries of l_p^n for p != 2.  Away from the
# identity they stay at distance at least max(2^(1/p), 2^(1/q)).

# %%
for p in (1.5, 2, 3, 4):
    m = min_gap(3, p)
    print(f"p={p}: min |T - I| = {m.value:.6f} at {m.argmin.cycle_type()}  bound {gap_bound(p):.6f}")
