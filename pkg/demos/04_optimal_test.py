"""
The optimal count test and its error
====================================

Given spike counts over ``[0, T]``, the optimal test sums the counts of the
neurons active under only one hypothesis and compares the total with a
threshold halfway between the two means.  Its error lies between the
closed-form lower and upper bounds.
"""

import numpy as np

from placegrid import analysis, codes, montecarlo

code = codes.make_random_place(30, mu=30.0, seed=5)
s1, s2 = 0.1, 0.45
d = codes.delta(code, s1, s2).delta
print("Delta:", d, "KL at T=1:", analysis.kl_divergence(code, s1, s2, 1.0))

# One simulated trial
rng = montecarlo.make_rng(0)
counts = montecarlo.simulate_counts(code, s1, 0.2, rng)
print("decision:", montecarlo.optimal_test(code, s1, s2, counts, 0.2))

# Empirical error against the bounds, for T on the natural scale 1/(Delta C_mu)
for x in (0.05, 0.5, 2.0):
    T = x / (d * analysis.c_mu(30.0))
    b = analysis.pe_bounds(code, s1, s2, T)
    batch = montecarlo.estimate_error(code, s1, s2, T, 10_000, master_seed=1)
    print(f"T={T:.4f}: {b.pe_lower:.4f} <= {batch.p_hat:.4f} <= {b.pe_upper:.4f}")

# Smallest time on a grid with error at most alpha
grid = np.geomspace(0.001, 20, 200)
print("empirical T_min:", montecarlo.empirical_tmin(code, s1, s2, 0.05, grid, 5000, 0),
      "1/Delta:", 1 / d)
