"""
Discrimination time against Delta and rho
=========================================

For five codes of 100 neurons, the smallest time at which the optimal test
reaches error 0.05 is proportional to 1/Delta with one shared constant.  The
worst-case proxy over distances follows 1/rho for the place code and stays
flat for balanced grid codes.  Output goes to ``figure_out/``.
"""

import sys

from placegrid.experiments import ExperimentConfig, run_figure

fast = "--full" not in sys.argv
res = run_figure(ExperimentConfig(master_seed=0), "figure_out", fast=fast, svg=True)
for c in res["checks"]:
    print(f"{'ok ' if c['passed'] else 'BAD'} {c['name']}: {c['value']:.3f} (bound {c['bound']:g})")
print("files:", res["paths"])
