"""Discrimination times of place and grid cell population codes on the circle."""
from .analysis import (
    ErrorBounds,
    kl_divergence,
    pe_bounds,
    poisson_tail_lower,
    poisson_tail_upper,
    t_min,
    t_of_rho_exact,
    t_of_rho_sampled,
)
from .codes import (
    CellBudgetError,
    Code,
    DeltaReport,
    Neuron,
    active_set,
    breakpoints,
    delta,
    make_adaptive_place,
    make_balanced_grid,
    make_extreme_dyadic,
    make_general,
    make_grid,
    make_random_place,
    make_uniform_place,
)
from .geometry import Arc, CirclePoint, arc_contains, arc_pair_distance_range, distance, mod_reduce
from .montecarlo import TrialBatch, empirical_tmin, estimate_error, optimal_test, simulate_counts
from .theory import GridSpec

__version__ = "0.1.0"
