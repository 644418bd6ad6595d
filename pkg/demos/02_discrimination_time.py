"""
Worst-case discrimination time at a given distance
==================================================

``T(f, rho)`` is the reciprocal of the smallest Delta over all pairs of stimuli
at distance at least ``rho``.  It is computed exactly by enumerating pairs of
breakpoint cells, or approximated from one anchor stimulus.
"""

import numpy as np

from placegrid import analysis, codes, theory

# d-uniform codes: impossible below 1/d, then 1/floor(n/d)
uni = codes.make_uniform_place(100, 10)
for rho in (0.05, 0.1, 0.3):
    print(f"uniform  rho={rho}: T={analysis.t_of_rho_exact(uni, rho)}")

# The adaptive place code follows 1/rho and sits in its sandwich
g = codes.make_adaptive_place(100)
for rho in (0.01, 0.05, 0.25, 0.5):
    lo, hi = theory.adaptive_place_sandwich(100, rho)
    print(f"adaptive rho={rho}: {lo:.4f} <= {analysis.t_of_rho_exact(g, rho):.4f} <= {hi:.4f}")

# The dyadic code separates everything down to 2^-n, and nothing below
dy = codes.make_extreme_dyadic(10)
print("dyadic:", analysis.t_of_rho_exact(dy, 2.0 ** -10), analysis.t_of_rho_exact(dy, 2.0 ** -11))

# Large grid codes exceed the cell budget; the anchored proxy still works
big = codes.make_balanced_grid(100, 20)
try:
    analysis.t_of_rho_exact(big, 0.1)
except codes.CellBudgetError as exc:
    print("exact refused:", exc)
rhos = 2.0 ** -np.arange(1, 21)
print("sampled balanced grid:", {float(r): analysis.t_of_rho_sampled(big, r) for r in rhos[::5]})
