"""
Closed-form bounds against exact values
=======================================

Every bound in ``placegrid.theory`` can be set against the exact time of a
concrete code.  ``verify_bounds`` runs the whole sweep at once.
"""

import numpy as np

from placegrid import analysis, codes, theory
from placegrid.experiments import verify_bounds

# Place codes: any code is at least as slow as the place lower bound
n = 40
for rho in np.linspace(0.05, 0.5, 4):
    d = int(np.ceil(1 / rho - 1e-9))
    t = analysis.t_of_rho_exact(codes.make_uniform_place(n, d), rho)
    print(f"rho={rho:.3f} lower={theory.place_lower_bound(n, rho):.4f} uniform={t:.4f} "
          f"upper={theory.place_minimax_upper(n, rho):.4f}")

# Grid codes: class lower bound and the adaptive upper bound
code = codes.make_balanced_grid(16, 4)
spec = theory.GridSpec.from_code(code)
for rho in (1 / 16, 1 / 4, 1 / 2):
    print(f"grid rho={rho}: {theory.grid_lower_bound(spec, rho):.4f} <= "
          f"{analysis.t_of_rho_exact(code, rho):.4f} <= "
          f"{theory.grid_adaptive_upper_bound(spec, rho):.4f}")

# The balanced rate with m = floor(log2(1/rho)) modules
print("balanced rate n=100 rho=2^-20:", theory.balanced_rate(100, 2.0 ** -20))

report = verify_bounds(seed=0, trials=2000)
print(f"{len(report)} checks, {sum(not c['passed'] for c in report)} failed")
