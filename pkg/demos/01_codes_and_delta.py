"""
Place codes, grid codes and the discrimination statistic
========================================================

A binary code assigns each neuron an arc of the circle.  The neuron fires at
the high rate ``mu`` inside its arc and at rate 1 outside.  Two stimuli can
only be told apart through the neurons whose state differs between them.
"""

import numpy as np

from placegrid import codes

# Four neurons with evenly spread half-circle fields
place = codes.make_adaptive_place(4)
for s in (0.05, 0.3, 0.55, 0.8):
    print(f"theta={s:.2f} active={sorted(codes.active_set(place, s))}")

# Delta(s1, s2) is the larger of the two exclusive active sets
rep = codes.delta(place, 0.05, 0.55)
print("delta:", rep.delta, "only in s1:", rep.only_in_1, "only in s2:", rep.only_in_2)

# A grid code stacks modules at dyadic scales; Delta splits across modules
grid = codes.make_balanced_grid(12, 3)
rep = codes.delta(grid, 0.1, 0.35)
print("grid delta:", rep.delta, "per module:", rep.per_module)

# The active set is constant on the cells between breakpoints
part = codes.cell_partition(grid)
print("cells:", part.size, "shortest:", part.lengths.min())

# Codes serialize to canonical JSON
text = codes.dumps(codes.make_random_place(3, seed=1))
print(text)
assert codes.loads(text) == codes.make_random_place(3, seed=1)

# The extreme dyadic code reads binary digits: neuron j fires iff digit j is 0
dy = codes.make_extreme_dyadic(3)
print([sorted(codes.active_set(dy, x)) for x in np.arange(8) / 8])
